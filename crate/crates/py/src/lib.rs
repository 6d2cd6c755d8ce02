//! Python bindings: `NetworkParams`, the analytic coefficients, Monte Carlo
//! estimates and the special functions.

use blockcorr::analytic;
use blockcorr::montecarlo;
use blockcorr::specfun;
use blockcorr::{AnalyticOptions, I0Method, MobilityMode, ObservationPoint, PointKind};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: blockcorr::Error) -> PyErr {
    match e {
        blockcorr::Error::InvalidParameter(_) | blockcorr::Error::Domain(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn point_of(spec: &str, half_length: f64) -> PyResult<ObservationPoint> {
    match spec {
        "center" => Ok(ObservationPoint::center()),
        "boundary" => Ok(ObservationPoint::boundary(half_length)),
        other => {
            let y: f64 = other
                .parse()
                .map_err(|_| PyValueError::new_err(format!("invalid point '{other}'")))?;
            ObservationPoint::at(y, half_length).map_err(to_py)
        }
    }
}

fn mode_of(s: &str) -> PyResult<MobilityMode> {
    match s {
        "static" => Ok(MobilityMode::Static),
        "iid" => Ok(MobilityMode::IidMobility),
        other => Err(PyValueError::new_err(format!(
            "invalid mode '{other}': expected static or iid"
        ))),
    }
}

fn options(laplace_i0: bool) -> AnalyticOptions {
    AnalyticOptions {
        i0: if laplace_i0 {
            I0Method::Laplace
        } else {
            I0Method::Quadrature
        },
    }
}

#[pyclass(name = "NetworkParams", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyNetworkParams {
    lambda_: f64,
    mu: f64,
    gamma: f64,
    xi: f64,
    alpha: f64,
    halflen: f64,
}

impl PyNetworkParams {
    fn inner(&self) -> blockcorr::NetworkParams {
        blockcorr::NetworkParams::new(
            self.lambda_,
            self.mu,
            self.gamma,
            self.xi,
            self.alpha,
            self.halflen,
        )
        .expect("validated at construction")
    }
}

#[pymethods]
impl PyNetworkParams {
    #[new]
    #[pyo3(signature = (lambda_, mu, gamma = 1.0, xi = 1.0, alpha = 2.0, halflen = 25.0))]
    fn new(lambda_: f64, mu: f64, gamma: f64, xi: f64, alpha: f64, halflen: f64) -> PyResult<Self> {
        blockcorr::NetworkParams::new(lambda_, mu, gamma, xi, alpha, halflen).map_err(to_py)?;
        Ok(Self {
            lambda_,
            mu,
            gamma,
            xi,
            alpha,
            halflen,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkParams(lambda_={}, mu={}, gamma={}, xi={}, alpha={}, halflen={})",
            self.lambda_, self.mu, self.gamma, self.xi, self.alpha, self.halflen
        )
    }
}

#[pyclass(name = "Correlation", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyCorrelation {
    rho0: f64,
    rho_inf: f64,
    method: String,
}

#[pymethods]
impl PyCorrelation {
    fn __repr__(&self) -> String {
        format!(
            "Correlation(rho0={}, rho_inf={}, method='{}')",
            self.rho0, self.rho_inf, self.method
        )
    }
}

impl From<blockcorr::CorrelationResult> for PyCorrelation {
    fn from(r: blockcorr::CorrelationResult) -> Self {
        Self {
            rho0: r.rho0,
            rho_inf: r.rho_inf,
            method: r.method.to_string(),
        }
    }
}

#[pyclass(name = "Moments", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyMoments {
    mean: f64,
    second_moment: f64,
    i_integral: f64,
    sigma: f64,
    sigma1: f64,
    sigma2: f64,
    variance: f64,
}

#[pyclass(name = "McEstimate", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyMcEstimate {
    rho: f64,
    rho_se: f64,
    mean: f64,
    mean_se: f64,
    second_moment: f64,
    second_moment_se: f64,
    trials: usize,
    seed: u64,
    mode: String,
}

#[pymethods]
impl PyMcEstimate {
    fn __repr__(&self) -> String {
        format!(
            "McEstimate(rho={} ± {}, trials={}, seed={}, mode='{}')",
            self.rho, self.rho_se, self.trials, self.seed, self.mode
        )
    }
}

fn moments_for(
    p: &blockcorr::NetworkParams,
    point: &ObservationPoint,
    opts: &AnalyticOptions,
) -> PyResult<blockcorr::MomentSet> {
    match point.kind() {
        PointKind::Center => analytic::moments(p, opts),
        _ => analytic::moments_at_point(p, point),
    }
    .map_err(to_py)
}

/// Mean, second moment and covariance terms of the interference.
#[pyfunction]
#[pyo3(signature = (params, point = "center", laplace_i0 = false))]
fn moments(params: &PyNetworkParams, point: &str, laplace_i0: bool) -> PyResult<PyMoments> {
    let p = params.inner();
    let m = moments_for(&p, &point_of(point, p.half_length)?, &options(laplace_i0))?;
    Ok(PyMoments {
        mean: m.mean,
        second_moment: m.second_moment,
        i_integral: m.i_integral,
        sigma: m.sigma,
        sigma1: m.sigma1,
        sigma2: m.sigma2,
        variance: m.variance,
    })
}

/// Static and mobile correlation coefficients.
#[pyfunction]
#[pyo3(signature = (params, point = "center", laplace_i0 = false))]
fn rho(params: &PyNetworkParams, point: &str, laplace_i0: bool) -> PyResult<PyCorrelation> {
    let p = params.inner();
    let m = moments_for(&p, &point_of(point, p.half_length)?, &options(laplace_i0))?;
    Ok(analytic::rho_from_moments(&p, &m).map_err(to_py)?.into())
}

#[pyfunction]
fn rho_no_blockage(params: &PyNetworkParams) -> PyResult<PyCorrelation> {
    Ok(analytic::rho_no_blockage(&params.inner()).map_err(to_py)?.into())
}

#[pyfunction]
fn rho_high_mu(params: &PyNetworkParams) -> PyResult<PyCorrelation> {
    Ok(analytic::rho_high_mu(&params.inner()).map_err(to_py)?.into())
}

#[pyfunction]
#[pyo3(signature = (params, laplace_i0 = false))]
fn critical_density(params: &PyNetworkParams, laplace_i0: bool) -> PyResult<f64> {
    analytic::critical_density(&params.inner(), &options(laplace_i0)).map_err(to_py)
}

#[pyfunction]
fn critical_density_closed_form(mu: f64, halflen: f64) -> f64 {
    analytic::critical_density_closed_form(mu, halflen)
}

/// Monte Carlo estimate; releases the GIL while simulating.
#[pyfunction]
#[pyo3(signature = (params, point = "center", mode = "static", trials = 100_000, seed = 1, threads = None))]
fn estimate(
    py: Python<'_>,
    params: &PyNetworkParams,
    point: &str,
    mode: &str,
    trials: usize,
    seed: u64,
    threads: Option<usize>,
) -> PyResult<PyMcEstimate> {
    let p = params.inner();
    let pt = point_of(point, p.half_length)?;
    let m = mode_of(mode)?;
    let est = py
        .detach(|| match threads {
            Some(n) => montecarlo::estimate_with_threads(&p, &pt, m, trials, seed, n),
            None => montecarlo::estimate(&p, &pt, m, trials, seed),
        })
        .map_err(to_py)?;
    Ok(PyMcEstimate {
        rho: est.rho.value,
        rho_se: est.rho.std_error,
        mean: est.mean.value,
        mean_se: est.mean.std_error,
        second_moment: est.second_moment.value,
        second_moment_se: est.second_moment.std_error,
        trials: est.trials,
        seed: est.seed,
        mode: est.mode.to_string(),
    })
}

#[pyfunction]
fn exp_integral_en(n: f64, z: f64) -> PyResult<f64> {
    specfun::exp_integral_en(n, z).map_err(to_py)
}

#[pyfunction]
fn i0_exact(alpha: f64, mu: f64, gamma: f64, halflen: f64) -> PyResult<f64> {
    specfun::i0_exact(alpha, mu, gamma, halflen).map_err(to_py)
}

#[pyfunction]
fn i0_laplace(alpha: f64, mu: f64, gamma: f64) -> PyResult<f64> {
    specfun::i0_laplace(alpha, mu, gamma).map_err(to_py)
}

#[pymodule]
fn pyblockcorr(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetworkParams>()?;
    m.add_class::<PyCorrelation>()?;
    m.add_class::<PyMoments>()?;
    m.add_class::<PyMcEstimate>()?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(rho_no_blockage, m)?)?;
    m.add_function(wrap_pyfunction!(rho_high_mu, m)?)?;
    m.add_function(wrap_pyfunction!(critical_density, m)?)?;
    m.add_function(wrap_pyfunction!(critical_density_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(exp_integral_en, m)?)?;
    m.add_function(wrap_pyfunction!(i0_exact, m)?)?;
    m.add_function(wrap_pyfunction!(i0_laplace, m)?)?;
    Ok(())
}
