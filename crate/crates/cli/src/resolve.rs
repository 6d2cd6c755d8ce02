//! Merges built-in defaults, config entries and flags into model inputs.

use std::fmt;
use std::str::FromStr;

use blockcorr::{AnalyticOptions, I0Method, MobilityMode, NetworkParams, ObservationPoint};
use clap::ValueEnum;

use crate::args::{ModeArg, ParamArgs};
use crate::config::{pick, Config};
use crate::CliError;

/// Parameter values before validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamValues {
    pub lambda: f64,
    pub mu: f64,
    pub gamma: f64,
    pub xi: f64,
    pub alpha: f64,
    pub halflen: f64,
}

impl Default for ParamValues {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            mu: 1.0,
            gamma: 1.0,
            xi: 1.0,
            alpha: 2.0,
            halflen: 25.0,
        }
    }
}

pub fn resolve_params(args: &ParamArgs, cfg: &Config, base: ParamValues) -> Result<NetworkParams, CliError> {
    let p = NetworkParams::new(
        pick(args.lambda, cfg, "lambda", base.lambda)?,
        pick(args.mu, cfg, "mu", base.mu)?,
        pick(args.gamma, cfg, "gamma", base.gamma)?,
        pick(args.xi, cfg, "xi", base.xi)?,
        pick(args.alpha, cfg, "alpha", base.alpha)?,
        pick(args.halflen, cfg, "halflen", base.halflen)?,
    )?;
    Ok(p)
}

/// Whether `key` was given by flag or config.
pub fn is_set(args: &ParamArgs, cfg: &Config, key: &str) -> bool {
    let flag = match key {
        "lambda" => args.lambda.is_some(),
        "mu" => args.mu.is_some(),
        "gamma" => args.gamma.is_some(),
        "xi" => args.xi.is_some(),
        "alpha" => args.alpha.is_some(),
        "halflen" => args.halflen.is_some(),
        _ => false,
    };
    flag || cfg.raw(key).is_some()
}

pub fn analytic_options(flag: bool, cfg: &Config) -> Result<AnalyticOptions, CliError> {
    let laplace = flag || cfg.flag("laplace-i0")?;
    Ok(AnalyticOptions {
        i0: if laplace {
            I0Method::Laplace
        } else {
            I0Method::Quadrature
        },
    })
}

pub fn i0_label(opts: &AnalyticOptions) -> &'static str {
    match opts.i0 {
        I0Method::Quadrature => "quadrature",
        I0Method::Laplace => "laplace",
    }
}

/// Observation point as written on the command line; `boundary` needs `V`
/// to become concrete.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointSpec {
    Center,
    Boundary,
    Coord(f64),
}

impl PointSpec {
    pub fn resolve(&self, half_length: f64) -> Result<ObservationPoint, CliError> {
        match *self {
            PointSpec::Center => Ok(ObservationPoint::center()),
            PointSpec::Boundary => Ok(ObservationPoint::boundary(half_length)),
            PointSpec::Coord(y) => Ok(ObservationPoint::at(y, half_length)?),
        }
    }
}

impl FromStr for PointSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "center" => Ok(PointSpec::Center),
            "boundary" => Ok(PointSpec::Boundary),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|y| y.is_finite())
                .map(PointSpec::Coord)
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "invalid point '{other}': expected center, boundary or a number"
                    ))
                }),
        }
    }
}

impl fmt::Display for PointSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointSpec::Center => write!(f, "center"),
            PointSpec::Boundary => write!(f, "boundary"),
            PointSpec::Coord(y) => write!(f, "{y}"),
        }
    }
}

pub fn resolve_point(flag: Option<&str>, cfg: &Config) -> Result<PointSpec, CliError> {
    match flag.or(cfg.raw("point")) {
        Some(s) => s.parse(),
        None => Ok(PointSpec::Center),
    }
}

pub fn parse_mode(s: &str) -> Result<MobilityMode, CliError> {
    ModeArg::from_str(s.trim(), true)
        .map(Into::into)
        .map_err(|_| CliError::Usage(format!("invalid mode '{s}': expected static or iid")))
}

pub fn resolve_mode(
    flag: Option<ModeArg>,
    cfg: &Config,
    fallback: MobilityMode,
) -> Result<MobilityMode, CliError> {
    match (flag, cfg.raw("mode")) {
        (Some(m), _) => Ok(m.into()),
        (None, Some(s)) => parse_mode(s),
        (None, None) => Ok(fallback),
    }
}

/// Echo of the resolved model parameters for CSV metadata.
pub fn push_params(meta: &mut crate::output::Metadata, p: &NetworkParams) {
    meta.push("lambda", p.lambda);
    meta.push("mu", p.mu);
    meta.push("gamma", p.gamma);
    meta.push("xi", p.xi);
    meta.push("alpha", p.alpha);
    meta.push("halflen", p.half_length);
    meta.push("tx_power", p.tx_power);
}
