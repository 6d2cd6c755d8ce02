//! Generalized exponential integral of real order and the `I0` tail integral
//! that appears in the shared-obstacle part of the cross-user term.

use crate::quad::{integrate, integrate_breaks, QuadSpec};
use crate::{Error, Result, GAMMA_ZERO, MU_ZERO};

/// Exponent at which the scaled `E_n` integrand is cut off (`e^-60 ≈ 1e-26`).
const TAIL_CUTOFF: f64 = 60.0;

fn en_spec() -> QuadSpec {
    QuadSpec {
        rel_tol: 1e-13,
        abs_tol: 1e-300,
        max_subdivisions: 500,
    }
}

/// `E_n(z) = ∫₁^∞ t^{-n} e^{-zt} dt` for real `n ≥ 0`, `z ≥ 0`.
///
/// Evaluated as `e^{-z} ∫₀^U exp(-(n-1)u - z(e^u - 1)) du` after the
/// substitution `t = e^u`, so the quadrature sees an integrand that starts
/// at 1 and decays double-exponentially. `U` is chosen where the exponent
/// passes `TAIL_CUTOFF`.
pub fn exp_integral_en(n: f64, z: f64) -> Result<f64> {
    if !n.is_finite() || !z.is_finite() {
        return Err(Error::Domain(format!(
            "E_n(z) needs finite n, z (got n={n}, z={z})"
        )));
    }
    if n < 0.0 || z < 0.0 {
        return Err(Error::Domain(format!(
            "E_n(z) needs n >= 0 and z >= 0 (got n={n}, z={z})"
        )));
    }
    if z == 0.0 {
        if n <= 1.0 {
            return Err(Error::Domain(format!("E_{n}(0) diverges")));
        }
        return Ok(1.0 / (n - 1.0));
    }
    if n == 0.0 {
        return Ok((-z).exp() / z);
    }

    let exponent = |u: f64| (n - 1.0) * u + z * u.exp_m1();
    let mut upper = 1.0;
    while exponent(upper) < TAIL_CUTOFF {
        upper *= 2.0;
    }
    let scaled = integrate(|u| (-exponent(u)).exp(), 0.0, upper, &en_spec())?;
    Ok((-z).exp() * scaled)
}

fn check_i0_args(alpha: f64, mu: f64, gamma: f64) -> Result<()> {
    if !(alpha >= 2.0 && alpha.is_finite()) {
        return Err(Error::Domain(format!(
            "pathloss exponent must be >= 2 (got {alpha})"
        )));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("blockage density must be >= 0 (got {mu})")));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma must lie in [0, 1] (got {gamma})")));
    }
    Ok(())
}

/// Exponential rates of the `I0` integrand: `(c, b)` with
/// `c = μ(2-γ)/2` and `b = μγ(3-2γ)/6`.
pub fn i0_rates(mu: f64, gamma: f64) -> (f64, f64) {
    (mu * (2.0 - gamma) / 2.0, mu * gamma * (3.0 - 2.0 * gamma) / 6.0)
}

/// `I0 = ∫₁^V e^{-cx} x^{1-2a} E_a(bx) dx` by adaptive quadrature.
///
/// Without blockage the integral is elementary and returned in closed form.
pub fn i0_exact(alpha: f64, mu: f64, gamma: f64, half_length: f64) -> Result<f64> {
    check_i0_args(alpha, mu, gamma)?;
    if half_length.is_nan() || half_length < 1.0 {
        return Err(Error::Domain(format!(
            "half-length must be >= 1 (got {half_length})"
        )));
    }
    if half_length == 1.0 {
        return Ok(0.0);
    }
    if mu < MU_ZERO {
        let k = alpha - 1.0;
        return Ok((1.0 - half_length.powf(-2.0 * k)) / (2.0 * k * k));
    }
    let (c, b) = i0_rates(mu, gamma);
    let integrand = |x: f64| -> f64 {
        match exp_integral_en(alpha, b * x) {
            Ok(e) => (-c * x).exp() * x.powf(1.0 - 2.0 * alpha) * e,
            Err(_) => f64::NAN,
        }
    };
    let spec = QuadSpec {
        rel_tol: 1e-11,
        abs_tol: 1e-300,
        max_subdivisions: 400,
    };
    // Seed breaks so sharply decaying integrands are resolved near x = 1.
    let mut breaks = vec![1.0];
    let mut x = 1.0;
    while x * 2.0 < half_length && (c * (x - 1.0)) < 50.0 {
        x *= 2.0;
        breaks.push(x);
    }
    breaks.push(half_length);
    integrate_breaks(integrand, &breaks, &spec)
}

/// Second-order Laplace approximation of `I0` in the `V → ∞` limit.
///
/// Expands the log-integrand `g(x) = -cx + (1-2a) ln x + ln E_a(bx)` about
/// the endpoint `x = 1`: `I0 ≈ e^{g(1)} (1/A + 2B/A³)` with `A = -g'(1)`,
/// `B = g''(1)/2`. Requires `b > 0`; the no-blockage and impenetrable cases
/// belong to [`i0_exact`].
pub fn i0_laplace(alpha: f64, mu: f64, gamma: f64) -> Result<f64> {
    check_i0_args(alpha, mu, gamma)?;
    if mu < MU_ZERO || gamma < GAMMA_ZERO {
        return Err(Error::Domain(
            "Laplace approximation of I0 needs mu > 0 and gamma > 0; use i0_exact".into(),
        ));
    }
    let (c, b) = i0_rates(mu, gamma);
    let e_a = exp_integral_en(alpha, b)?;
    let e_a1 = exp_integral_en(alpha - 1.0, b)?;
    let e_a2 = exp_integral_en(alpha - 2.0, b)?;

    let r1 = b * e_a1 / e_a;
    let r2 = b * b * e_a2 / e_a;
    let slope = 2.0 * alpha - 1.0 + c + r1;
    let curvature = 0.5 * (2.0 * alpha - 1.0 + r2 - r1 * r1);
    Ok((-c).exp() * e_a * (1.0 / slope + 2.0 * curvature / slope.powi(3)))
}
