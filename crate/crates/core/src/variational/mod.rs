//! Macroscopic variational formulas.
//!
//! `gamma` and `g_wedge` are the homogeneous last-passage shape and wedge
//! shape; [`gamma_q`] evaluates the inhomogeneous passage time over
//! segment paths; [`g_q_level`] inverts it in `y`; [`hydro_v`] and
//! [`hydro_v_path`] evaluate the hydrodynamic height `v(x, t)` through the
//! envelope and the path formulation respectively.

mod gamma_q;
mod hydro;
mod initial;
mod level;
mod path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gamma_q::{gamma_q, gamma_q_with, GammaQ, GammaQOptions, MacroPath};
pub use hydro::{hydro_v, hydro_v_with, rho_from_v, HydroOptions, HydroValue};
pub use initial::{InitialProfile, ProfileParseError};
pub use level::{g_q_level, g_q_level_with, LevelOptions};
pub use path::{hydro_v_path, VelocityPath};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariationalError {
    #[error("({x}, {y}) is outside the wedge y >= 0, x >= -y")]
    OutsideWedge { x: f64, y: f64 },
    #[error("time must be positive, got {0}")]
    Time(f64),
    #[error("invalid argument: {0}")]
    Argument(String),
}

/// Point of the wedge `W = {(x, y) : y >= 0, x >= -y}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WedgePoint {
    pub x: f64,
    pub y: f64,
}

impl WedgePoint {
    pub fn new(x: f64, y: f64) -> Result<Self, VariationalError> {
        if !(y >= 0.0 && x >= -y) {
            return Err(VariationalError::OutsideWedge { x, y });
        }
        Ok(WedgePoint { x, y })
    }
}

/// Homogeneous last-passage shape `(sqrt(x + y) + sqrt(y))^2` on the wedge.
pub fn gamma(x: f64, y: f64) -> Result<f64, VariationalError> {
    if !(y >= 0.0 && x + y >= 0.0) {
        return Err(VariationalError::OutsideWedge { x, y });
    }
    Ok(gamma_unchecked(x, y))
}

/// `gamma` without the wedge check; tiny negative rounding is clamped.
#[inline]
pub(crate) fn gamma_unchecked(x: f64, y: f64) -> f64 {
    let s = (x + y).max(0.0).sqrt() + y.max(0.0).sqrt();
    s * s
}

/// Wedge shape `g(y) = sup_{0 <= r <= 1} { r(1 - r) - y r }`.
#[inline]
pub fn g_wedge(y: f64) -> f64 {
    if y <= -1.0 {
        -y
    } else if y >= 1.0 {
        0.0
    } else {
        0.25 * (1.0 - y) * (1.0 - y)
    }
}

/// Gap `(c f)^*(y) - (c h)^*(y)` between the conjugates of the restricted
/// flux `c r(1 - r)` on `[0, 1]` and the unrestricted parabola. It is
/// nonnegative and vanishes exactly for `|y| <= c`.
pub fn dual_flux_gap(y: f64, c: f64) -> f64 {
    // (c h)^*(y) = inf_r { y r - c r(1 - r) } = -(c - y)^2 / (4c).
    let unrestricted = -(c - y) * (c - y) / (4.0 * c);
    let restricted = -c * g_wedge(y / c);
    (restricted - unrestricted).max(0.0)
}
