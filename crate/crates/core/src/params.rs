use std::fmt;

use crate::{Error, Result};

/// Model constants for the network on the segment `[-V, V]`.
///
/// Pathloss is `l(r) = min(1, r^-alpha)`, fading is unit-mean Rayleigh,
/// each user transmits with probability `xi` per slot, and every obstacle
/// attenuates by a `Uniform[0, gamma]` factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    /// User density per unit length.
    pub lambda: f64,
    /// Blockage density per unit length.
    pub mu: f64,
    /// Upper end of the per-obstacle loss factor.
    pub gamma: f64,
    /// Per-slot transmit probability.
    pub xi: f64,
    /// Pathloss exponent.
    pub alpha: f64,
    /// Half-length `V` of the deployment segment.
    pub half_length: f64,
    /// Common transmit power; the correlation coefficients do not depend on it.
    pub tx_power: f64,
}

impl NetworkParams {
    pub fn new(lambda: f64, mu: f64, gamma: f64, xi: f64, alpha: f64, half_length: f64) -> Result<Self> {
        let p = Self {
            lambda,
            mu,
            gamma,
            xi,
            alpha,
            half_length,
            tx_power: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be positive");
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad("mu must be finite and non-negative");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(self.xi > 0.0 && self.xi <= 1.0) {
            return bad("xi must lie in (0, 1]");
        }
        if !(self.alpha >= 2.0 && self.alpha.is_finite()) {
            return bad("alpha must be at least 2");
        }
        if !(self.half_length > 1.0 && self.half_length.is_finite()) {
            return bad("halflen must be greater than 1");
        }
        if !(self.tx_power > 0.0 && self.tx_power.is_finite()) {
            return bad("tx_power must be positive");
        }
        Ok(())
    }

    /// User-to-blockage density ratio `λ/μ`.
    pub fn density_ratio(&self) -> f64 {
        self.lambda / self.mu
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn with_mu(self, mu: f64) -> Self {
        Self { mu, ..self }
    }

    pub fn with_half_length(self, half_length: f64) -> Self {
        Self { half_length, ..self }
    }

    /// Bounded pathloss `min(1, r^-alpha)` at distance `r ≥ 0`.
    pub fn pathloss(&self, r: f64) -> f64 {
        if r <= 1.0 {
            1.0
        } else {
            r.powf(-self.alpha)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    Center,
    Boundary,
    General,
}

/// Location `y_p` where interference is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationPoint {
    y: f64,
    kind: PointKind,
}

impl ObservationPoint {
    pub fn center() -> Self {
        Self {
            y: 0.0,
            kind: PointKind::Center,
        }
    }

    /// The right end `y_p = V`.
    pub fn boundary(half_length: f64) -> Self {
        Self {
            y: half_length,
            kind: PointKind::Boundary,
        }
    }

    /// A point at `y`, tagged by where it falls on `[-V, V]`.
    pub fn at(y: f64, half_length: f64) -> Result<Self> {
        if !y.is_finite() || y.abs() > half_length {
            return Err(Error::InvalidParameter(format!(
                "observation point {y} lies outside [-{half_length}, {half_length}]"
            )));
        }
        let kind = if y == 0.0 {
            PointKind::Center
        } else if y.abs() == half_length {
            PointKind::Boundary
        } else {
            PointKind::General
        };
        Ok(Self { y, kind })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    /// Lengths of the segment to the left and right of the point.
    pub fn side_lengths(&self, half_length: f64) -> (f64, f64) {
        (half_length + self.y, half_length - self.y)
    }
}

impl fmt::Display for ObservationPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PointKind::Center => write!(f, "center"),
            PointKind::Boundary => write!(f, "boundary"),
            PointKind::General => write!(f, "{}", self.y),
        }
    }
}

/// The two velocity limits: users that never move, and users whose
/// positions are redrawn independently every slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MobilityMode {
    Static,
    IidMobility,
}

impl fmt::Display for MobilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MobilityMode::Static => write!(f, "static"),
            MobilityMode::IidMobility => write!(f, "iid"),
        }
    }
}
