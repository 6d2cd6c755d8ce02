//! Closed-form interference statistics and temporal correlation coefficients.
//!
//! All closed forms are for the observation point at the origin. Other
//! points go through [`moments_at_point`], which integrates the defining
//! integrals numerically on each side of the point.
//!
//! Notation used below, with `a` the pathloss exponent:
//!
//! * `c = μ(2-γ)/2` is the decay rate of `E{β}` along a link,
//! * `d = μ(3-γ²)/3` is the decay rate of `E{β²}`,
//! * `b = d - c = μγ(3-2γ)/6` is the extra decay of obstacles shared by two
//!   links on the same side.

use std::fmt;

use crate::params::{MobilityMode, NetworkParams, ObservationPoint};
use crate::quad::{integrate, integrate_breaks, QuadSpec};
use crate::specfun::{exp_integral_en, i0_exact, i0_laplace, i0_rates};
use crate::{Error, Result, GAMMA_ZERO, MU_ZERO};

/// How the `I0` tail integral inside `σ₂` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum I0Method {
    #[default]
    Quadrature,
    /// Second-order Laplace estimate of the `V → ∞` limit. Only used where
    /// it is defined (`μ > 0`, `γ > 0`).
    Laplace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AnalyticOptions {
    pub i0: I0Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    NoBlockageClosedForm,
    HighMuExpansion,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::NoBlockageClosedForm => "no_blockage_closed_form",
            Method::HighMuExpansion => "high_mu_expansion",
        })
    }
}

/// First and second order interference statistics for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    /// `E{I}`.
    pub mean: f64,
    /// `E{I²} = 2λξ I + σ` (times `P_t²`).
    pub second_moment: f64,
    /// `I = ∫ E{β_x²} l²(x) dx` over the segment, relative to the point.
    pub i_integral: f64,
    /// Cross-user term `σ = λ²ξ² ∫∫ E{β_x β_y} l(x) l(y)`.
    pub sigma: f64,
    /// Part of `σ` from pairs on opposite sides (no shared obstacles). At
    /// the origin this equals `mean²/2`.
    pub sigma1: f64,
    /// Part of `σ` from pairs on the same side.
    pub sigma2: f64,
    /// `σ - E{I}²`, the covariance added by shared obstacles. Zero without
    /// blockage.
    pub user_covariance: f64,
    /// `E{I²} - E{I}²`.
    pub variance: f64,
}

/// Pearson coefficients for the static (`rho0`) and i.i.d.-mobility
/// (`rho_inf`) limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub rho0: f64,
    pub rho_inf: f64,
    pub method: Method,
}

impl CorrelationResult {
    pub fn get(&self, mode: MobilityMode) -> f64 {
        match mode {
            MobilityMode::Static => self.rho0,
            MobilityMode::IidMobility => self.rho_inf,
        }
    }
}

/// `(1 - e^{-t}) / t`, continuous at 0.
fn phi(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        -(-t).exp_m1() / t
    }
}

/// `∫₁^V x^{-n} e^{-rate·x} dx = E_n(rate) - V^{1-n} E_n(rate·V)`.
fn tail(n: f64, rate: f64, half_length: f64) -> Result<f64> {
    if rate <= 0.0 {
        return Ok((1.0 - half_length.powf(1.0 - n)) / (n - 1.0));
    }
    Ok(exp_integral_en(n, rate)? - half_length.powf(1.0 - n) * exp_integral_en(n, rate * half_length)?)
}

/// `∫₀¹ x e^{-μx} dx`, with a series near zero where the closed form cancels.
fn ramp_integral(mu: f64) -> f64 {
    if mu < 0.1 {
        let mut term = 1.0;
        let mut sum = 0.5;
        for k in 1..30 {
            term *= -mu / k as f64;
            sum += term / (k as f64 + 2.0);
        }
        sum
    } else {
        (-(-mu).exp_m1() - mu * (-mu).exp()) / (mu * mu)
    }
}

fn quad_spec() -> QuadSpec {
    QuadSpec {
        rel_tol: 1e-12,
        abs_tol: 1e-300,
        max_subdivisions: 400,
    }
}

fn has_blockage(p: &NetworkParams) -> bool {
    p.mu >= MU_ZERO
}

/// `E{I}` at the origin.
pub fn mean_interference(p: &NetworkParams) -> Result<f64> {
    p.validate()?;
    let (c, _) = i0_rates(p.mu, p.gamma);
    let c = if has_blockage(p) { c } else { 0.0 };
    let per_side = phi(c) + tail(p.alpha, c, p.half_length)?;
    Ok(2.0 * p.lambda * p.xi * p.tx_power * per_side)
}

/// `I = ∫_{-V}^{V} E{β_x²} l²(x) dx` at the origin, closed form.
pub fn i_integral(p: &NetworkParams) -> Result<f64> {
    p.validate()?;
    let d = if has_blockage(p) {
        p.mu * (3.0 - p.gamma * p.gamma) / 3.0
    } else {
        0.0
    };
    Ok(2.0 * (phi(d) + tail(2.0 * p.alpha, d, p.half_length)?))
}

/// Same integral as [`i_integral`] by direct quadrature.
pub fn i_integral_quadrature(p: &NetworkParams) -> Result<f64> {
    p.validate()?;
    let d = p.mu * (3.0 - p.gamma * p.gamma) / 3.0;
    let half = integrate_breaks(
        |x| (-d * x).exp() * p.pathloss(x).powi(2),
        &[0.0, 1.0, p.half_length],
        &quad_spec(),
    )?;
    Ok(2.0 * half)
}

/// Cross-user terms `(σ, σ₁, σ₂)` at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaTerms {
    pub sigma: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

/// `σ₂ / (4λ²ξ²P²)`, the same-side double integral `∫₀^V ∫₀^x E{β_xβ_y} l l`.
fn shared_double_integral(p: &NetworkParams, opts: &AnalyticOptions) -> Result<f64> {
    let a = p.alpha;
    let v = p.half_length;
    if p.gamma < GAMMA_ZERO {
        // Impenetrable obstacles: every shared pair is attenuated by the far user's link.
        let mu = p.mu;
        return Ok(
            ramp_integral(mu) + a / (a - 1.0) * tail(a, mu, v)? - tail(2.0 * a - 1.0, mu, v)? / (a - 1.0)
        );
    }

    let (c, b) = i0_rates(p.mu, p.gamma);
    let d = c + b;
    // ∫₀¹ e^{-cx} (1 - e^{-bx})/b dx; the closed difference cancels when b ≪ c.
    let near = if b >= 1e-5 * c.max(1.0) {
        (phi(c) - phi(d)) / b
    } else {
        integrate(|x| x * (-c * x).exp() * phi(b * x), 0.0, 1.0, &quad_spec())?
    };
    let far = (phi(b) + exp_integral_en(a, b)?) * tail(a, c, v)?;
    let i0 = match opts.i0 {
        I0Method::Quadrature => i0_exact(a, p.mu, p.gamma, v)?,
        I0Method::Laplace => i0_laplace(a, p.mu, p.gamma)?,
    };
    Ok(near + far - i0)
}

pub fn sigma_terms(p: &NetworkParams, opts: &AnalyticOptions) -> Result<SigmaTerms> {
    let mean = mean_interference(p)?;
    let sigma1 = 0.5 * mean * mean;
    let sigma2 = if has_blockage(p) {
        let scale = 4.0 * (p.lambda * p.xi * p.tx_power).powi(2);
        scale * shared_double_integral(p, opts)?
    } else {
        mean * mean - sigma1
    };
    Ok(SigmaTerms {
        sigma: sigma1 + sigma2,
        sigma1,
        sigma2,
    })
}

/// `E{I²} = 2λξP² I + σ` at the origin.
pub fn second_moment(p: &NetworkParams, opts: &AnalyticOptions) -> Result<f64> {
    let i = i_integral(p)?;
    let s = sigma_terms(p, opts)?;
    Ok(2.0 * p.lambda * p.xi * p.tx_power.powi(2) * i + s.sigma)
}

/// Every moment at the origin.
pub fn moments(p: &NetworkParams, opts: &AnalyticOptions) -> Result<MomentSet> {
    let mean = mean_interference(p)?;
    let i = i_integral(p)?;
    let s = sigma_terms(p, opts)?;
    let self_term = 2.0 * p.lambda * p.xi * p.tx_power.powi(2) * i;
    let user_covariance = s.sigma2 - s.sigma1;
    Ok(MomentSet {
        mean,
        second_moment: self_term + s.sigma,
        i_integral: i,
        sigma: s.sigma,
        sigma1: s.sigma1,
        sigma2: s.sigma2,
        user_covariance,
        variance: self_term + user_covariance,
    })
}

/// `E{I(t) I(τ)}` at the origin.
///
/// Static users keep their position, so a user's own link contributes its
/// full second moment of blockage; with i.i.d. positions each user
/// contributes the average over two independent positions, which is
/// `σ / (2λV)`.
pub fn cross_moment(p: &NetworkParams, mode: MobilityMode, opts: &AnalyticOptions) -> Result<f64> {
    let m = moments(p, opts)?;
    Ok(cross_from_moments(p, &m, mode))
}

fn cross_from_moments(p: &NetworkParams, m: &MomentSet, mode: MobilityMode) -> f64 {
    match mode {
        MobilityMode::Static => p.lambda * p.xi * p.xi * p.tx_power.powi(2) * m.i_integral + m.sigma,
        MobilityMode::IidMobility => m.sigma / (2.0 * p.lambda * p.half_length) + m.sigma,
    }
}

/// Both coefficients from a moment set computed at any observation point.
pub fn rho_from_moments(p: &NetworkParams, m: &MomentSet) -> Result<CorrelationResult> {
    if p.lambda * p.xi == 0.0 {
        return Err(Error::Degenerate("lambda * xi must be positive".into()));
    }
    let self_term = p.lambda * p.tx_power.powi(2) * m.i_integral;
    let denom = 2.0 * p.xi * self_term + m.user_covariance;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::Degenerate(format!("interference variance is {denom}")));
    }
    let rho0 = (p.xi * p.xi * self_term + m.user_covariance) / denom;
    let rho_inf = (m.sigma / (2.0 * p.lambda * p.half_length) + m.user_covariance) / denom;
    Ok(CorrelationResult {
        rho0,
        rho_inf,
        method: Method::Exact,
    })
}

/// `ρ₀` and `ρ∞` at the origin from the exact moments.
pub fn rho(p: &NetworkParams, opts: &AnalyticOptions) -> Result<CorrelationResult> {
    let m = moments(p, opts)?;
    rho_from_moments(p, &m)
}

/// Closed forms without blockage at the origin: `ρ₀ = ξ/2` and
/// `ρ∞ = ξ(a - V^{1-a})²(2a-1) / (2V(a-1)²(2a - V^{1-2a}))`.
/// `mu` is ignored.
pub fn rho_no_blockage(p: &NetworkParams) -> Result<CorrelationResult> {
    p.validate()?;
    let (a, v, xi) = (p.alpha, p.half_length, p.xi);
    let rho_inf = xi * (a - v.powf(1.0 - a)).powi(2) * (2.0 * a - 1.0)
        / (2.0 * v * (a - 1.0).powi(2) * (2.0 * a - v.powf(1.0 - 2.0 * a)));
    Ok(CorrelationResult {
        rho0: xi / 2.0,
        rho_inf,
        method: Method::NoBlockageClosedForm,
    })
}

/// Exact `ρ∞` without blockage at the boundary `y_p = V`, where the point
/// sees a single side of length `2V`.
pub fn rho_inf_no_blockage_boundary(p: &NetworkParams) -> Result<f64> {
    p.validate()?;
    let (a, v, xi) = (p.alpha, p.half_length, p.xi);
    let w = 2.0 * v;
    Ok(xi * (a - w.powf(1.0 - a)).powi(2) * (2.0 * a - 1.0)
        / (4.0 * v * (a - 1.0).powi(2) * (2.0 * a - w.powf(1.0 - 2.0 * a))))
}

/// Large-`V` shorthand for the boundary `ρ∞` without blockage, which keeps
/// the center formula's `V^{1-a}` and `V^{1-2a}` corrections. Exactly half
/// the center value.
pub fn rho_inf_no_blockage_boundary_approx(p: &NetworkParams) -> Result<f64> {
    Ok(0.5 * rho_no_blockage(p)?.rho_inf)
}

fn high_mu_prelude(p: &NetworkParams) -> Result<(f64, f64, f64, f64)> {
    p.validate()?;
    if !has_blockage(p) {
        return Err(Error::Domain("high-blockage expansion needs mu > 0".into()));
    }
    Ok((2.0 - p.gamma, 3.0 - p.gamma * p.gamma, p.density_ratio(), p.xi))
}

/// Leading-order moments for `μ → ∞` at fixed `p = λ/μ`, substituted into
/// the coefficient formulas. `ρ∞` keeps the `1/(2λV)` self-term, which
/// dominates at small `λ`.
pub fn rho_high_mu(p: &NetworkParams) -> Result<CorrelationResult> {
    let (q, r, ratio, xi) = high_mu_prelude(p)?;
    let w = 1.0 / (2.0 * p.lambda * p.half_length);
    let shared = xi * ratio * q;
    let disjoint = xi * ratio * r;
    let rho0 =
        (3.0 * xi * q * q + 12.0 * shared - 4.0 * disjoint) / (6.0 * q * q + 12.0 * shared - 4.0 * disjoint);
    let rho_inf = ((1.0 + w) * 6.0 * shared - (1.0 - w) * 2.0 * disjoint)
        / (3.0 * q * q + 6.0 * shared - 2.0 * disjoint);
    Ok(CorrelationResult {
        rho0,
        rho_inf,
        method: Method::HighMuExpansion,
    })
}

/// Second-order series in `p = λ/μ` of the high-blockage coefficients,
/// with the `1/(2λV)` contribution dropped from `ρ∞`.
pub fn rho_high_mu_series(p: &NetworkParams) -> Result<CorrelationResult> {
    let (q, r, ratio, xi) = high_mu_prelude(p)?;
    let s = 3.0 - 3.0 * p.gamma + p.gamma * p.gamma;
    let q2 = q * q;
    let rho0 = xi / 2.0 + s * (2.0 - xi) * xi * ratio / (3.0 * q2)
        - 2.0 * s * s * (2.0 - xi) * xi * xi * ratio * ratio / (9.0 * q2 * q2);
    let lead = 6.0 * xi * q - 2.0 * xi * r;
    let rho_inf = lead * ratio / (3.0 * q2) - lead * lead * ratio * ratio / (9.0 * q2 * q2);
    Ok(CorrelationResult {
        rho0,
        rho_inf,
        method: Method::HighMuExpansion,
    })
}

/// Moments at an arbitrary observation point by quadrature of the defining
/// integrals on each side of the point.
pub fn moments_at_point(p: &NetworkParams, point: &ObservationPoint) -> Result<MomentSet> {
    p.validate()?;
    let v = p.half_length;
    if point.y().abs() > v {
        return Err(Error::InvalidParameter(format!(
            "observation point {} lies outside [-{v}, {v}]",
            point.y()
        )));
    }
    let blocked = has_blockage(p);
    let (c, b) = if blocked {
        i0_rates(p.mu, p.gamma)
    } else {
        (0.0, 0.0)
    };
    let d = c + b;
    let spec = quad_spec();
    let outer = QuadSpec {
        rel_tol: 1e-10,
        ..spec
    };
    let breaks = |t: f64| if t > 1.0 { vec![0.0, 1.0, t] } else { vec![0.0, t] };
    let l = |x: f64| p.pathloss(x);

    let first = |t: f64| integrate_breaks(|x| (-c * x).exp() * l(x), &breaks(t), &spec);
    let square = |t: f64| integrate_breaks(|x| (-d * x).exp() * l(x).powi(2), &breaks(t), &spec);
    // Same-side pairs: the nearer user at y < x shares the obstacles on [0, y].
    let inner = |x: f64| -> f64 {
        integrate_breaks(|y| (-b * y).exp() * l(y), &breaks(x), &spec).unwrap_or(f64::NAN)
    };
    let shared = |t: f64| integrate_breaks(|x| (-c * x).exp() * l(x) * inner(x), &breaks(t), &outer);

    let (left, right) = point.side_lengths(v);
    let (fl, fr) = (first(left)?, first(right)?);
    let i = square(left)? + square(right)?;
    let scale = (p.lambda * p.xi * p.tx_power).powi(2);
    let mean = p.lambda * p.xi * p.tx_power * (fl + fr);
    let sigma1 = 2.0 * scale * fl * fr;
    let (sigma2, user_covariance) = if blocked {
        let (hl, hr) = (shared(left)?, shared(right)?);
        (
            2.0 * scale * (hl + hr),
            scale * (2.0 * hl - fl * fl + 2.0 * hr - fr * fr),
        )
    } else {
        (mean * mean - sigma1, 0.0)
    };
    let self_term = 2.0 * p.lambda * p.xi * p.tx_power.powi(2) * i;
    Ok(MomentSet {
        mean,
        second_moment: self_term + sigma1 + sigma2,
        i_integral: i,
        sigma: sigma1 + sigma2,
        sigma1,
        sigma2,
        user_covariance,
        variance: self_term + user_covariance,
    })
}

/// `ρ₀` and `ρ∞` at an arbitrary observation point.
pub fn rho_at_point(p: &NetworkParams, point: &ObservationPoint) -> Result<CorrelationResult> {
    let m = moments_at_point(p, point)?;
    rho_from_moments(p, &m)
}

/// High-blockage closed form of the critical density, `9μ/(4V-6)`, valid for
/// `a = 2`, `γ = ξ = 1` and large `V`.
pub fn critical_density_closed_form(mu: f64, half_length: f64) -> f64 {
    9.0 * mu / (4.0 * half_length - 6.0)
}

/// User density `λ*` at which `ρ∞` under blockage equals `ρ∞` without it.
///
/// Bisection on `λ` with relative tolerance `1e-8`, starting from
/// `[1e-6, 10³·max(1, μ)]` and widening the bracket by decades if needed.
pub fn critical_density(p: &NetworkParams, opts: &AnalyticOptions) -> Result<f64> {
    p.validate()?;
    if !has_blockage(p) {
        return Err(Error::Domain("critical density needs mu > 0".into()));
    }
    let target = rho_no_blockage(p)?.rho_inf;
    let gap = |lambda: f64| -> Result<f64> { Ok(rho(&p.with_lambda(lambda), opts)?.rho_inf - target) };

    let mut lo = 1e-6;
    let mut hi = 1e3 * p.mu.max(1.0);
    let mut g_lo = gap(lo)?;
    let mut g_hi = gap(hi)?;
    for _ in 0..6 {
        if g_lo <= 0.0 {
            break;
        }
        lo /= 10.0;
        g_lo = gap(lo)?;
    }
    for _ in 0..6 {
        if g_hi >= 0.0 {
            break;
        }
        hi *= 10.0;
        g_hi = gap(hi)?;
    }
    if g_lo > 0.0 || g_hi < 0.0 {
        return Err(Error::Bracket(format!(
            "rho_inf never crosses the no-blockage value {target:.6} for lambda in [{lo:e}, {hi:e}]"
        )));
    }
    if g_lo == 0.0 {
        return Ok(lo);
    }
    while (hi - lo) > 1e-8 * hi {
        let mid = 0.5 * (lo + hi);
        let g = gap(mid)?;
        if g == 0.0 {
            return Ok(mid);
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
