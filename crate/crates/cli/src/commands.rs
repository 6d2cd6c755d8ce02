use blockcorr::analytic::{
    critical_density, critical_density_closed_form, moments, moments_at_point, rho_from_moments, rho_high_mu,
};
use blockcorr::montecarlo::{estimate, estimate_with_threads, McEstimate, ESTIMATOR};
use blockcorr::{
    AnalyticOptions, CorrelationResult, MobilityMode, MomentSet, NetworkParams, ObservationPoint, PointKind,
    MU_ZERO,
};

use crate::args::{CriticalArgs, EvalArgs, ValidateArgs};
use crate::config::{pick, Config};
use crate::output::{emit, num, opt_num, write_table, Metadata};
use crate::resolve::{
    analytic_options, i0_label, push_params, resolve_mode, resolve_params, resolve_point, ParamValues,
};
use crate::CliError;

/// `|z|` above which `validate` reports disagreement.
pub const Z_LIMIT: f64 = 4.0;
pub const DEFAULT_TRIALS: usize = 100_000;
pub const DEFAULT_SEED: u64 = 1;

pub const EVAL_HEADER: [&str; 9] = [
    "point",
    "method",
    "mean",
    "second_moment",
    "sigma",
    "sigma1",
    "sigma2",
    "rho0",
    "rho_inf",
];
pub const VALIDATE_HEADER: [&str; 8] = [
    "point",
    "mode",
    "analytic",
    "estimate",
    "std_error",
    "z",
    "trials",
    "seed",
];
pub const CRITICAL_HEADER: [&str; 5] = ["mu", "halflen", "numeric", "closed_form", "relative_gap"];

/// Exact moments at `point`; closed forms at the center, quadrature elsewhere.
pub fn point_moments(
    p: &NetworkParams,
    point: &ObservationPoint,
    opts: &AnalyticOptions,
) -> Result<MomentSet, CliError> {
    let m = match point.kind() {
        PointKind::Center => moments(p, opts)?,
        _ => moments_at_point(p, point)?,
    };
    Ok(m)
}

pub fn point_rho(
    p: &NetworkParams,
    point: &ObservationPoint,
    opts: &AnalyticOptions,
) -> Result<CorrelationResult, CliError> {
    Ok(rho_from_moments(p, &point_moments(p, point, opts)?)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub moments: Option<MomentSet>,
    pub rho: CorrelationResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub params: NetworkParams,
    pub point: ObservationPoint,
    pub rows: Vec<EvalRow>,
}

pub fn eval(
    p: &NetworkParams,
    point: &ObservationPoint,
    high_mu: bool,
    opts: &AnalyticOptions,
) -> Result<EvalReport, CliError> {
    let m = point_moments(p, point, opts)?;
    let mut rows = vec![EvalRow {
        moments: Some(m),
        rho: rho_from_moments(p, &m)?,
    }];
    if high_mu {
        if point.kind() != PointKind::Center {
            return Err(CliError::Usage(
                "--high-mu is only available at the center".into(),
            ));
        }
        rows.push(EvalRow {
            moments: None,
            rho: rho_high_mu(p)?,
        });
    }
    Ok(EvalReport {
        params: *p,
        point: *point,
        rows,
    })
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport, CliError> {
    let cfg = Config::load_optional(args.params.config.as_deref())?;
    let p = resolve_params(&args.params, &cfg, ParamValues::default())?;
    let point = resolve_point(args.point.as_deref(), &cfg)?.resolve(p.half_length)?;
    let opts = analytic_options(args.laplace_i0, &cfg)?;
    let high_mu = args.high_mu || cfg.flag("high-mu")?;
    let report = eval(&p, &point, high_mu, &opts)?;

    let mut meta = Metadata::new("eval");
    push_params(&mut meta, &p);
    meta.push("point", point);
    meta.push("i0", i0_label(&opts));
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let m = r.moments;
            vec![
                point.to_string(),
                r.rho.method.to_string(),
                opt_num(m.map(|m| m.mean)),
                opt_num(m.map(|m| m.second_moment)),
                opt_num(m.map(|m| m.sigma)),
                opt_num(m.map(|m| m.sigma1)),
                opt_num(m.map(|m| m.sigma2)),
                num(r.rho.rho0),
                num(r.rho.rho_inf),
            ]
        })
        .collect();
    emit(args.out.as_deref(), |w| {
        write_table(w, &meta, &EVAL_HEADER, &rows)
    })?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateReport {
    pub params: NetworkParams,
    pub point: ObservationPoint,
    pub mode: MobilityMode,
    pub analytic: f64,
    pub estimate: McEstimate,
    pub z: f64,
}

impl ValidateReport {
    pub fn agrees(&self) -> bool {
        self.z.abs() <= Z_LIMIT
    }
}

pub fn validate(
    p: &NetworkParams,
    point: &ObservationPoint,
    mode: MobilityMode,
    trials: usize,
    seed: u64,
    threads: Option<usize>,
    opts: &AnalyticOptions,
) -> Result<ValidateReport, CliError> {
    let est = match threads {
        Some(n) => estimate_with_threads(p, point, mode, trials, seed, n)?,
        None => estimate(p, point, mode, trials, seed)?,
    };
    let analytic = point_rho(p, point, opts)?.get(mode);
    Ok(ValidateReport {
        params: *p,
        point: *point,
        mode,
        analytic,
        z: est.rho.z_score(analytic),
        estimate: est,
    })
}

/// Writes the comparison and returns it; a disagreement beyond [`Z_LIMIT`]
/// is reported as an error after the output is complete.
pub fn cmd_validate(args: &ValidateArgs) -> Result<ValidateReport, CliError> {
    let cfg = Config::load_optional(args.params.config.as_deref())?;
    let p = resolve_params(&args.params, &cfg, ParamValues::default())?;
    let point = resolve_point(args.point.as_deref(), &cfg)?.resolve(p.half_length)?;
    let mode = resolve_mode(args.mode, &cfg, MobilityMode::Static)?;
    let trials = pick(args.trials, &cfg, "trials", DEFAULT_TRIALS)?;
    let seed = pick(args.seed, &cfg, "seed", DEFAULT_SEED)?;
    let threads = match args.threads {
        Some(n) => Some(n),
        None => cfg.get("threads")?,
    };
    let opts = analytic_options(args.laplace_i0, &cfg)?;
    let report = validate(&p, &point, mode, trials, seed, threads, &opts)?;

    let mut meta = Metadata::new("validate");
    push_params(&mut meta, &p);
    meta.push("point", point);
    meta.push("mode", mode);
    meta.push("trials", trials);
    meta.push("seed", seed);
    meta.push("estimator", ESTIMATOR);
    meta.push("i0", i0_label(&opts));
    meta.push("z_limit", Z_LIMIT);
    let e = &report.estimate;
    let row = vec![
        point.to_string(),
        mode.to_string(),
        num(report.analytic),
        num(e.rho.value),
        num(e.rho.std_error),
        num(report.z),
        e.trials.to_string(),
        e.seed.to_string(),
    ];
    emit(args.out.as_deref(), |w| {
        write_table(w, &meta, &VALIDATE_HEADER, &[row])
    })?;
    if !report.agrees() {
        return Err(CliError::Disagreement {
            z: report.z,
            limit: Z_LIMIT,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalReport {
    pub params: NetworkParams,
    pub numeric: f64,
    /// `9μ/(4V-6)`, reported only for `a = 2`, `γ = ξ = 1`.
    pub closed_form: Option<f64>,
    /// `|numeric - closed_form| / closed_form`.
    pub relative_gap: Option<f64>,
}

pub fn critical(p: &NetworkParams, opts: &AnalyticOptions) -> Result<CriticalReport, CliError> {
    if p.mu < MU_ZERO {
        return Err(CliError::Usage("critical density needs mu > 0".into()));
    }
    let numeric = critical_density(p, opts)?;
    let closed_form = (p.alpha == 2.0 && p.gamma == 1.0 && p.xi == 1.0)
        .then(|| critical_density_closed_form(p.mu, p.half_length));
    Ok(CriticalReport {
        params: *p,
        numeric,
        closed_form,
        relative_gap: closed_form.map(|c| (numeric - c).abs() / c),
    })
}

pub fn cmd_critical(args: &CriticalArgs) -> Result<CriticalReport, CliError> {
    let cfg = Config::load_optional(args.params.config.as_deref())?;
    let p = resolve_params(&args.params, &cfg, ParamValues::default())?;
    let opts = analytic_options(args.laplace_i0, &cfg)?;
    let report = critical(&p, &opts)?;

    let mut meta = Metadata::new("critical");
    push_params(&mut meta, &p);
    meta.push("i0", i0_label(&opts));
    let row = vec![
        num(p.mu),
        num(p.half_length),
        num(report.numeric),
        opt_num(report.closed_form),
        opt_num(report.relative_gap),
    ];
    emit(args.out.as_deref(), |w| {
        write_table(w, &meta, &CRITICAL_HEADER, &[row])
    })?;
    Ok(report)
}
