//! Moments of the penetration loss produced by a Poisson field of point
//! obstacles, each attenuating by an independent `Uniform[0, γ]` factor.

use crate::{Error, Result};

/// Two links `x_i → y_p` and `x_j → y_p` seen from the observation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub d_i: f64,
    pub d_j: f64,
    /// Both sources on the same side of `y_p`, so the shorter link's
    /// obstacles are also crossed by the longer one.
    pub shares_obstacles: bool,
}

impl LinkGeometry {
    pub fn new(d_i: f64, d_j: f64, shares_obstacles: bool) -> Result<Self> {
        for (name, d) in [("d_i", d_i), ("d_j", d_j)] {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::Domain(format!("{name} must be finite and >= 0 (got {d})")));
            }
        }
        Ok(Self {
            d_i,
            d_j,
            shares_obstacles,
        })
    }

    /// Geometry of two sources at `x_i`, `x_j` observed at `y_p`. A source
    /// sitting exactly on `y_p` has distance 0 and so sees no obstacles.
    pub fn from_positions(x_i: f64, x_j: f64, y_p: f64) -> Result<Self> {
        let (ri, rj) = (x_i - y_p, x_j - y_p);
        let shared = ri * rj > 0.0;
        Self::new(ri.abs(), rj.abs(), shared)
    }
}

fn check(mu: f64, gamma: f64) -> Result<()> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!(
            "blockage density must be finite and >= 0 (got {mu})"
        )));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma must lie in [0, 1] (got {gamma})")));
    }
    Ok(())
}

/// `E{β^s} = exp(-μ d (1 - γ^s / (1+s)))` for a link of length `d`.
pub fn penetration_moment(s: f64, d: f64, mu: f64, gamma: f64) -> Result<f64> {
    check(mu, gamma)?;
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("moment order must be positive (got {s})")));
    }
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!(
            "distance must be finite and >= 0 (got {d})"
        )));
    }
    Ok((-mu * d * (1.0 - gamma.powf(s) / (1.0 + s))).exp())
}

/// `E{β_i β_j}` for two links to the same observation point.
///
/// Disjoint links factorise. Links on the same side share the obstacles on
/// the shorter one, each of which contributes its second moment `γ²/3`.
pub fn penetration_cross_moment(geom: &LinkGeometry, mu: f64, gamma: f64) -> Result<f64> {
    check(mu, gamma)?;
    let LinkGeometry {
        d_i,
        d_j,
        shares_obstacles,
    } = *geom;
    let single = 1.0 - gamma / 2.0;
    if shares_obstacles {
        let shared = 1.0 - gamma * gamma / 3.0;
        Ok((-mu * d_i.min(d_j) * shared).exp() * (-mu * (d_i - d_j).abs() * single).exp())
    } else {
        Ok((-mu * (d_i + d_j) * single).exp())
    }
}
