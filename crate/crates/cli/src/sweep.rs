//! Grids of correlation coefficients, including the three figure presets.

use std::fmt;

use blockcorr::analytic::rho_high_mu;
use blockcorr::{AnalyticOptions, CorrelationResult, MobilityMode, NetworkParams, PointKind};
use rayon::prelude::*;

use crate::args::{AxisArg, Preset, SweepArgs};
use crate::commands::point_rho;
use crate::config::Config;
use crate::output::{emit, num, write_table, Metadata};
use crate::resolve::{
    analytic_options, i0_label, is_set, parse_mode, push_params, resolve_params, ParamValues, PointSpec,
};
use crate::CliError;

pub const SWEEP_HEADER: [&str; 10] = [
    "axis_value",
    "lambda",
    "mu",
    "halflen",
    "point",
    "mode",
    "rho0",
    "rho_inf",
    "rho",
    "method",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    UserDensity,
    BlockageDensity,
}

impl Axis {
    fn apply(self, p: &NetworkParams, v: f64) -> NetworkParams {
        match self {
            Axis::UserDensity => p.with_lambda(v),
            Axis::BlockageDensity => p.with_mu(v),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::UserDensity => write!(f, "lambda"),
            Axis::BlockageDensity => write!(f, "mu"),
        }
    }
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Lambda => Axis::UserDensity,
            AxisArg::Mu => Axis::BlockageDensity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMethod {
    Exact,
    HighMu,
}

/// One sweep: every curve is a fixed parameter set, evaluated along `axis`
/// at each grid value, point and mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub curves: Vec<NetworkParams>,
    pub points: Vec<PointSpec>,
    pub modes: Vec<MobilityMode>,
    pub method: SweepMethod,
    pub options: AnalyticOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub params: NetworkParams,
    pub point: PointSpec,
    pub mode: MobilityMode,
    pub result: CorrelationResult,
}

impl SweepRow {
    pub fn rho(&self) -> f64 {
        self.result.get(self.mode)
    }

    fn record(&self) -> Vec<String> {
        vec![
            num(self.axis_value),
            num(self.params.lambda),
            num(self.params.mu),
            num(self.params.half_length),
            self.point.to_string(),
            self.mode.to_string(),
            num(self.result.rho0),
            num(self.result.rho_inf),
            num(self.rho()),
            self.result.method.to_string(),
        ]
    }
}

/// `count` values spaced evenly in `log10` from `min` to `max`.
pub fn log_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>, CliError> {
    if !(min > 0.0 && max.is_finite() && max >= min) || count == 0 || (count == 1 && max != min) {
        return Err(CliError::Usage(format!(
            "invalid log grid: min={min}, max={max}, count={count}"
        )));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let (a, b) = (min.log10(), max.log10());
    let step = (b - a) / (count - 1) as f64;
    let mut g: Vec<f64> = (0..count).map(|i| 10f64.powf(a + step * i as f64)).collect();
    g[0] = min;
    g[count - 1] = max;
    Ok(g)
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("invalid grid value '{t}'")))
        })
        .collect()
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid.is_empty() {
            return Err(CliError::Usage("grid is empty".into()));
        }
        if self.grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(CliError::Usage("grid values must be positive".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Usage("grid must be strictly increasing".into()));
        }
        if self.curves.is_empty() || self.points.is_empty() || self.modes.is_empty() {
            return Err(CliError::Usage(
                "sweep needs at least one curve, point and mode".into(),
            ));
        }
        if self.method == SweepMethod::HighMu && self.points.iter().any(|p| *p != PointSpec::Center) {
            return Err(CliError::Usage(
                "--high-mu is only available at the center".into(),
            ));
        }
        for c in &self.curves {
            for point in &self.points {
                point.resolve(c.half_length)?;
            }
        }
        Ok(())
    }

    /// Figure presets around `base`. fig1 sweeps `λ` for `μ ∈ {0, 1, 10}`
    /// at `V = 25`; fig2 sweeps `μ` for `V ∈ {10, 25}`; fig3 sweeps `μ` at
    /// the center and the boundary with `V = 10`, mobile mode only.
    pub fn preset(preset: Preset, base: &NetworkParams, options: AnalyticOptions) -> Self {
        let both = vec![MobilityMode::Static, MobilityMode::IidMobility];
        match preset {
            Preset::Fig1 => Self {
                axis: Axis::UserDensity,
                grid: log_grid(1e-2, 1e2, 81).expect("static grid"),
                curves: [0.0, 1.0, 10.0].iter().map(|&mu| base.with_mu(mu)).collect(),
                points: vec![PointSpec::Center],
                modes: both,
                method: SweepMethod::Exact,
                options,
            },
            Preset::Fig2 => Self {
                axis: Axis::BlockageDensity,
                grid: log_grid(1e-2, 1e2, 81).expect("static grid"),
                curves: [10.0, 25.0].iter().map(|&v| base.with_half_length(v)).collect(),
                points: vec![PointSpec::Center],
                modes: both,
                method: SweepMethod::Exact,
                options,
            },
            Preset::Fig3 => Self {
                axis: Axis::BlockageDensity,
                grid: log_grid(1e-3, 1e2, 51).expect("static grid"),
                curves: vec![*base],
                points: vec![PointSpec::Center, PointSpec::Boundary],
                modes: vec![MobilityMode::IidMobility],
                method: SweepMethod::Exact,
                options,
            },
        }
    }

    /// Evaluates every grid point, in parallel, and returns rows ordered by
    /// curve, point, grid value and mode.
    pub fn run(&self) -> Result<Vec<SweepRow>, CliError> {
        self.validate()?;
        let cells: Vec<(NetworkParams, PointSpec, f64)> = self
            .curves
            .iter()
            .flat_map(|c| {
                self.points
                    .iter()
                    .flat_map(move |pt| self.grid.iter().map(move |&v| (*c, *pt, v)))
            })
            .collect();
        let results: Vec<Result<(NetworkParams, PointSpec, f64, CorrelationResult), CliError>> = cells
            .par_iter()
            .map(|&(c, pt, v)| {
                let p = self.axis.apply(&c, v);
                p.validate()?;
                let r = match self.method {
                    SweepMethod::Exact => point_rho(&p, &pt.resolve(p.half_length)?, &self.options)?,
                    SweepMethod::HighMu => rho_high_mu(&p)?,
                };
                Ok((p, pt, v, r))
            })
            .collect();
        let mut rows = Vec::with_capacity(results.len() * self.modes.len());
        for res in results {
            let (params, point, axis_value, result) = res?;
            for &mode in &self.modes {
                rows.push(SweepRow {
                    axis_value,
                    params,
                    point,
                    mode,
                    result,
                });
            }
        }
        Ok(rows)
    }

    fn metadata(&self, base: &NetworkParams, preset: Option<Preset>) -> Metadata {
        let mut meta = Metadata::new("sweep");
        if let Some(p) = preset {
            meta.push("preset", format!("{p:?}").to_lowercase());
        }
        push_params(&mut meta, base);
        meta.push("axis", self.axis);
        meta.push("grid", join(self.grid.iter().map(|v| num(*v))));
        let curve_key = match preset {
            Some(Preset::Fig2) => "curves_halflen",
            Some(Preset::Fig1) => "curves_mu",
            _ => "curves",
        };
        let curve_vals = match preset {
            Some(Preset::Fig2) => join(self.curves.iter().map(|c| num(c.half_length))),
            Some(Preset::Fig1) => join(self.curves.iter().map(|c| num(c.mu))),
            _ => self.curves.len().to_string(),
        };
        meta.push(curve_key, curve_vals);
        meta.push("points", join(self.points.iter().map(|p| p.to_string())));
        meta.push("modes", join(self.modes.iter().map(|m| m.to_string())));
        meta.push(
            "method",
            match self.method {
                SweepMethod::Exact => "exact",
                SweepMethod::HighMu => "high_mu_expansion",
            },
        );
        meta.push("i0", i0_label(&self.options));
        meta
    }
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(";")
}

pub fn write_rows(w: &mut dyn std::io::Write, meta: &Metadata, rows: &[SweepRow]) -> Result<(), CliError> {
    let records: Vec<Vec<String>> = rows.iter().map(SweepRow::record).collect();
    write_table(w, meta, &SWEEP_HEADER, &records)
}

fn preset_defaults(preset: Option<Preset>) -> ParamValues {
    let mut v = ParamValues::default();
    match preset {
        Some(Preset::Fig1) => v.halflen = 25.0,
        Some(Preset::Fig3) => v.halflen = 10.0,
        _ => {}
    }
    v
}

/// Parameters each preset fixes itself.
fn preset_owned(preset: Preset) -> &'static [&'static str] {
    match preset {
        Preset::Fig1 => &["lambda", "mu"],
        Preset::Fig2 => &["mu", "halflen"],
        Preset::Fig3 => &["mu"],
    }
}

fn grid_from(args: &SweepArgs, cfg: &Config) -> Result<Option<Vec<f64>>, CliError> {
    let explicit = match &args.grid {
        Some(g) => Some(g.clone()),
        None => cfg.raw("grid").map(str::to_string),
    };
    let min = args
        .grid_min
        .map_or_else(|| cfg.get::<f64>("grid-min"), |v| Ok(Some(v)))?;
    let max = args
        .grid_max
        .map_or_else(|| cfg.get::<f64>("grid-max"), |v| Ok(Some(v)))?;
    let count = args
        .grid_count
        .map_or_else(|| cfg.get::<usize>("grid-count"), |v| Ok(Some(v)))?;
    match (explicit, min, max, count) {
        (Some(g), None, None, None) => Ok(Some(parse_grid(&g)?)),
        (None, Some(a), Some(b), Some(n)) => Ok(Some(log_grid(a, b, n)?)),
        (None, None, None, None) => Ok(None),
        (Some(_), ..) => Err(CliError::Usage(
            "--grid cannot be combined with --grid-min/--grid-max/--grid-count".into(),
        )),
        _ => Err(CliError::Usage(
            "a log grid needs all of --grid-min, --grid-max and --grid-count".into(),
        )),
    }
}

/// Builds the sweep from flags and config without evaluating it.
pub fn spec_from_args(args: &SweepArgs) -> Result<(SweepSpec, NetworkParams, Option<Preset>), CliError> {
    let cfg = Config::load_optional(args.params.config.as_deref())?;
    let preset = match args.preset {
        Some(p) => Some(p),
        None => cfg
            .raw("preset")
            .map(|s| {
                <Preset as clap::ValueEnum>::from_str(s.trim(), true)
                    .map_err(|_| CliError::Usage(format!("invalid preset '{s}'")))
            })
            .transpose()?,
    };
    let options = analytic_options(args.laplace_i0, &cfg)?;
    let base = resolve_params(&args.params, &cfg, preset_defaults(preset))?;
    let grid = grid_from(args, &cfg)?;
    let axis_set = args.axis.is_some() || cfg.raw("axis").is_some();
    let mut points: Vec<PointSpec> = args.point.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    if points.is_empty() {
        if let Some(s) = cfg.raw("point") {
            points = s.split(',').map(str::parse).collect::<Result<_, _>>()?;
        }
    }
    let mut modes: Vec<MobilityMode> = args.mode.iter().map(|&m| m.into()).collect();
    if modes.is_empty() {
        if let Some(s) = cfg.raw("mode") {
            modes = s.split(',').map(parse_mode).collect::<Result<_, _>>()?;
        }
    }
    let high_mu = args.high_mu || cfg.flag("high-mu")?;

    let mut spec = match preset {
        Some(pr) => {
            for key in preset_owned(pr) {
                if is_set(&args.params, &cfg, key) {
                    return Err(CliError::Usage(format!(
                        "{key} is fixed by preset {}",
                        format!("{pr:?}").to_lowercase()
                    )));
                }
            }
            if axis_set {
                return Err(CliError::Usage("--axis cannot be combined with --preset".into()));
            }
            if pr == Preset::Fig3 && !points.is_empty() {
                return Err(CliError::Usage("points are fixed by preset fig3".into()));
            }
            let mut s = SweepSpec::preset(pr, &base, options);
            if let Some(g) = grid {
                s.grid = g;
            }
            if !points.is_empty() {
                s.points = points;
            }
            if !modes.is_empty() {
                s.modes = modes;
            }
            s
        }
        None => {
            let axis: Axis = match args.axis {
                Some(a) => a.into(),
                None => match cfg.raw("axis") {
                    Some(s) => <AxisArg as clap::ValueEnum>::from_str(s.trim(), true)
                        .map_err(|_| CliError::Usage(format!("invalid axis '{s}'")))?
                        .into(),
                    None => return Err(CliError::Usage("sweep needs --preset or --axis".into())),
                },
            };
            SweepSpec {
                axis,
                grid: grid.ok_or_else(|| CliError::Usage("sweep needs --grid or a log grid".into()))?,
                curves: vec![base],
                points: if points.is_empty() {
                    vec![PointSpec::Center]
                } else {
                    points
                },
                modes: if modes.is_empty() {
                    vec![MobilityMode::Static, MobilityMode::IidMobility]
                } else {
                    modes
                },
                method: SweepMethod::Exact,
                options,
            }
        }
    };
    if high_mu {
        spec.method = SweepMethod::HighMu;
    }
    spec.validate()?;
    Ok((spec, base, preset))
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Vec<SweepRow>, CliError> {
    let (spec, base, preset) = spec_from_args(args)?;
    let threads = match args.threads {
        Some(n) => Some(n),
        None => Config::load_optional(args.params.config.as_deref())?.get("threads")?,
    };
    let rows = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Failed(format!("cannot build thread pool: {e}")))?
            .install(|| spec.run())?,
        None => spec.run()?,
    };
    let meta = spec.metadata(&base, preset);
    emit(args.out.as_deref(), |w| write_rows(w, &meta, &rows))?;
    Ok(rows)
}

/// Whether a row is at the observation point kind `k`.
pub fn row_is(row: &SweepRow, k: PointKind) -> bool {
    row.point
        .resolve(row.params.half_length)
        .map(|p| p.kind() == k)
        .unwrap_or(false)
}
