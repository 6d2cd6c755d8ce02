use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "blockcorr",
    version,
    about = "Temporal interference correlation on a bounded line with random blockage"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moments and correlation coefficients at one parameter point.
    Eval(EvalArgs),
    /// Correlation coefficients over a grid of user or blockage densities.
    Sweep(SweepArgs),
    /// Compare the analytic coefficient with a Monte Carlo estimate.
    Validate(ValidateArgs),
    /// User density at which blockage stops lowering the mobile coefficient.
    Critical(CriticalArgs),
}

/// Model parameters shared by all subcommands. Unset values come from the
/// config file, then from built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// User density per unit length.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Blockage density per unit length.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Upper end of the uniform penetration loss, in [0, 1].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Transmit probability.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Pathloss exponent.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Half-length V of the segment [-V, V].
    #[arg(long)]
    pub halflen: Option<f64>,
    /// Flat key=value file; flags take precedence over its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// center, boundary, or a coordinate in [-V, V].
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Also report the large-blockage expansion.
    #[arg(long)]
    pub high_mu: bool,
    /// Use the Laplace approximation for the shared-obstacle integral.
    #[arg(long)]
    pub laplace_i0: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Parameter swept along the grid.
    #[arg(long, value_enum)]
    pub axis: Option<AxisArg>,
    /// Explicit comma-separated grid.
    #[arg(long)]
    pub grid: Option<String>,
    /// Lower end of a log-spaced grid.
    #[arg(long)]
    pub grid_min: Option<f64>,
    #[arg(long)]
    pub grid_max: Option<f64>,
    #[arg(long)]
    pub grid_count: Option<usize>,
    /// Observation points; repeat for several.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Vec<String>,
    /// Mobility modes; repeat for several. Both when absent.
    #[arg(long, value_enum)]
    pub mode: Vec<ModeArg>,
    /// Use the large-blockage expansion instead of the exact moments.
    #[arg(long)]
    pub high_mu: bool,
    #[arg(long)]
    pub laplace_i0: bool,
    /// Worker threads; rayon's default when absent.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Number of Monte Carlo trials, at least 1000.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub laplace_i0: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CriticalArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub laplace_i0: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Lambda,
    Mu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Static,
    Iid,
}

impl From<ModeArg> for blockcorr::MobilityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Static => blockcorr::MobilityMode::Static,
            ModeArg::Iid => blockcorr::MobilityMode::IidMobility,
        }
    }
}
