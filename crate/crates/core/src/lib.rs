//! Temporal correlation of interference in a bounded one-dimensional ad hoc
//! network with Poisson users and Poisson blockage.
//!
//! The crate has two independent routes to the same statistics:
//!
//! * [`analytic`] evaluates the closed-form mean, second moment, cross-user
//!   term and the Pearson coefficients for static users (`rho0`) and users
//!   with i.i.d. positions across slots (`rho_inf`).
//! * [`montecarlo`] simulates the point processes, fading and activity and
//!   estimates the same quantities empirically.
//!
//! [`specfun`] and [`quad`] supply the generalized exponential integral and the
//! adaptive quadrature every formula relies on.

pub mod analytic;
pub mod blockage;
mod error;
pub mod montecarlo;
pub mod params;
pub mod quad;
pub mod specfun;

pub use analytic::{AnalyticOptions, CorrelationResult, I0Method, Method, MomentSet};
pub use error::{Error, Result};
pub use params::{MobilityMode, NetworkParams, ObservationPoint, PointKind};

/// Densities below this are treated as exactly zero (no blockage).
pub const MU_ZERO: f64 = 1e-12;

/// Loss factors below this are treated as impenetrable blockage.
pub const GAMMA_ZERO: f64 = 1e-12;
