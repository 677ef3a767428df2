//! `v(x, t)` for constant initial density `rho` (so `v0(q) = rho q`):
//! the maximum of the contributions of starting points right of the origin
//! (`r_*`) and left of it (`l_*`), with `*_plus` for `x >= 0` and
//! `*_minus` for `x < 0`.

use serde::{Deserialize, Serialize};

use super::{h, TwoPhaseConstants, TwoPhaseError};
use crate::variational::g_wedge;

/// The two candidate values combined at `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseValues {
    /// Starting points on the same side as `x`.
    pub same_side: f64,
    /// Starting points on the opposite side.
    pub across: f64,
}

impl CaseValues {
    pub fn value(&self) -> f64 {
        self.same_side.max(self.across)
    }
}

fn check(x: f64, t: f64, rho: f64, c1: f64, c2: f64) -> Result<TwoPhaseConstants, TwoPhaseError> {
    let k = TwoPhaseConstants::new(c1, c2)?;
    if !(0.0..=1.0).contains(&rho) {
        return Err(TwoPhaseError::Density(rho));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(TwoPhaseError::Time(t));
    }
    if !x.is_finite() {
        return Err(TwoPhaseError::Domain { x, y: t });
    }
    Ok(k)
}

fn r_plus(x: f64, t: f64, rho: f64, k: &TwoPhaseConstants) -> f64 {
    let c2 = k.c2;
    if rho <= 0.5 && x < t * c2 * (1.0 - 2.0 * rho) {
        -t * c2 * g_wedge(x / (t * c2))
    } else {
        rho * x - t * c2 * h(rho)
    }
}

fn l_plus(x: f64, t: f64, rho: f64, k: &TwoPhaseConstants) -> f64 {
    let c2 = k.c2;
    if rho < k.rho_star {
        let sd = k.d(rho).max(0.0).sqrt();
        if x <= t * sd {
            return -t * k.c1 * h(rho) + x * (0.5 - sd / (2.0 * c2));
        }
    }
    -c2 * t * g_wedge(x / (t * c2))
}

fn r_minus(x: f64, t: f64, rho: f64, k: &TwoPhaseConstants) -> f64 {
    let c1 = k.c1;
    if rho > 0.5 && x >= -t * k.d1(rho).max(0.0).sqrt() {
        let sd1 = k.d1(rho).max(0.0).sqrt();
        -t * k.c2 * h(rho) + x * (0.5 + sd1 / (2.0 * c1))
    } else {
        -t * c1 * g_wedge(x / (t * c1))
    }
}

/// Value of the path that waits at the origin, where the rate is `c2`.
fn interface_form(x: f64, t: f64, k: &TwoPhaseConstants) -> f64 {
    let (c1, c2, b) = (k.c1, k.c2, k.big_b);
    let w = 1.0 + b / c1;
    -(t + x / b) * c2 / 4.0 + x * c1 / (4.0 * b) * w * w
}

/// Value of the straight paths inside the left region.
fn left_straight(x: f64, t: f64, rho: f64, k: &TwoPhaseConstants) -> f64 {
    let c1 = k.c1;
    if x < -c1 * t * (2.0 * rho - 1.0) {
        rho * x - c1 * t * h(rho)
    } else {
        -t * c1 * g_wedge(x / (t * c1))
    }
}

/// `true` when the interface form is selected.
fn left_uses_interface(x: f64, t: f64, rho: f64, k: &TwoPhaseConstants) -> bool {
    let (c1, rs) = (k.c1, k.rho_star);
    if k.big_b == 0.0 || rho < rs {
        false
    } else if rho <= 0.5 {
        x > -t * c1 * (rho - rs)
    } else if rho <= 1.0 - rs {
        x >= -t * c1 * (rho - rs)
    } else {
        x >= -k.big_b * t
    }
}

fn l_minus(x: f64, t: f64, rho: f64, k: &TwoPhaseConstants) -> f64 {
    if left_uses_interface(x, t, rho, k) {
        interface_form(x, t, k)
    } else if rho <= 1.0 - k.rho_star {
        rho * x - t * k.c1 * h(rho)
    } else {
        left_straight(x, t, rho, k)
    }
}

/// Both candidates at `x` for constant initial density `rho`.
pub fn case_values(x: f64, t: f64, rho: f64, c1: f64, c2: f64) -> Result<CaseValues, TwoPhaseError> {
    let k = check(x, t, rho, c1, c2)?;
    Ok(if x >= 0.0 {
        CaseValues {
            same_side: r_plus(x, t, rho, &k),
            across: l_plus(x, t, rho, &k),
        }
    } else {
        CaseValues {
            same_side: l_minus(x, t, rho, &k),
            across: r_minus(x, t, rho, &k),
        }
    })
}

/// Closed-form `v(x, t)` for `rho_0 = rho` and `c1 >= c2`.
pub fn v_closed(x: f64, t: f64, rho: f64, c1: f64, c2: f64) -> Result<f64, TwoPhaseError> {
    case_values(x, t, rho, c1, c2).map(|c| c.value())
}

/// Flags points where the waiting-at-the-origin form is selected for the
/// left contribution but a straight path through the left region does
/// better, which would contradict the case table.
pub fn l_minus_crossing(x: f64, t: f64, rho: f64, c1: f64, c2: f64) -> Result<bool, TwoPhaseError> {
    let k = check(x, t, rho, c1, c2)?;
    if x >= 0.0 || !left_uses_interface(x, t, rho, &k) {
        return Ok(false);
    }
    let straight = left_straight(x, t, rho, &k);
    Ok(straight > interface_form(x, t, &k) + 1e-12 * straight.abs().max(1.0))
}
