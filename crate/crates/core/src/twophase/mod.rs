//! Closed forms for the two-phase speed `c = c1` on `x < 0`, `c2` on
//! `x >= 0` (lsc at the origin), restricted to `c1 >= c2`.

mod closed;
mod entropy;
mod profile;
mod weak;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use closed::{case_values, l_minus_crossing, v_closed, CaseValues};
pub use entropy::{entropy_check, entropy_check_samples, BoundaryCase, EntropyReport};
pub use profile::{classify, profile, DensityProfile, Jump, Piece, PieceKind, ProfileCase};
pub use weak::{
    residual_order, weak_residual, Bump, ConvergenceStudy, DensityField, FrozenField,
    ProfileEvolution, Quadrature,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwoPhaseError {
    #[error(
        "c1 = {c1} < c2 = {c2} is not supported; the case c1 < c2 follows from the particle-hole \
         transform, which is not implemented"
    )]
    Ordering { c1: f64, c2: f64 },
    #[error("rates must be positive and finite, got c1 = {c1}, c2 = {c2}")]
    Rates { c1: f64, c2: f64 },
    #[error("density {0} is outside the admissible range")]
    Density(f64),
    #[error("time must be positive, got {0}")]
    Time(f64),
    #[error("point ({x}, {y}) must have nonnegative finite coordinates")]
    Domain { x: f64, y: f64 },
    #[error("profile has no one-sided limits at 0: {0}")]
    Structure(String),
}

/// Homogeneous flux without the rate, `h(r) = r (1 - r)`.
#[inline]
pub fn h(r: f64) -> f64 {
    r * (1.0 - r)
}

/// Derived constants of a two-phase environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseConstants {
    pub c1: f64,
    pub c2: f64,
    /// Ratio `c1 / c2 >= 1`.
    pub c: f64,
    /// `2c - 1 - 2 sqrt(c (c - 1))`, in `(0, 1]`.
    pub b: f64,
    /// `sqrt(c1 (c1 - c2))`.
    pub big_b: f64,
    /// Critical density `1/2 - 1/2 sqrt(1 - c2 / c1)`.
    pub rho_star: f64,
}

impl TwoPhaseConstants {
    pub fn new(c1: f64, c2: f64) -> Result<Self, TwoPhaseError> {
        if !(c1.is_finite() && c2.is_finite() && c1 > 0.0 && c2 > 0.0) {
            return Err(TwoPhaseError::Rates { c1, c2 });
        }
        if c1 < c2 {
            return Err(TwoPhaseError::Ordering { c1, c2 });
        }
        let c = c1 / c2;
        Ok(TwoPhaseConstants {
            c1,
            c2,
            c,
            b: 2.0 * c - 1.0 - 2.0 * (c * (c - 1.0)).sqrt(),
            big_b: (c1 * (c1 - c2)).sqrt(),
            rho_star: 0.5 - 0.5 * (1.0 - c2 / c1).sqrt(),
        })
    }

    /// `c2^2 - 4 c1 c2 rho (1 - rho)`.
    pub fn d(&self, rho: f64) -> f64 {
        self.c2 * self.c2 - 4.0 * self.c1 * self.c2 * h(rho)
    }

    /// `c1^2 - 4 c1 c2 rho (1 - rho)`.
    pub fn d1(&self, rho: f64) -> f64 {
        self.c1 * self.c1 - 4.0 * self.c1 * self.c2 * h(rho)
    }
}

/// Limit shape of the two-phase corner growth model, where weights at
/// `(i, j)` have rate `c1` above the diagonal (`i < j`), `c2` below it and
/// the minimum on it.
pub fn phi(x: f64, y: f64, c1: f64, c2: f64) -> Result<f64, TwoPhaseError> {
    let k = TwoPhaseConstants::new(c1, c2)?;
    if !(x.is_finite() && y.is_finite() && x >= 0.0 && y >= 0.0) {
        return Err(TwoPhaseError::Domain { x, y });
    }
    let corner = |rate: f64| {
        let s = x.sqrt() + y.sqrt();
        s * s / rate
    };
    let b2 = k.b * k.b;
    Ok(if x <= b2 * y {
        corner(c1)
    } else if x < y {
        let (b, c) = (k.b, k.c);
        let denom = c1 * (1.0 - b2);
        x * (4.0 * c - (1.0 + b) * (1.0 + b)) / denom + y * ((1.0 + b) * (1.0 + b) - 4.0 * c * b2) / denom
    } else {
        corner(c2)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constants_for_ratio_two() {
        let k = TwoPhaseConstants::new(2.0, 1.0).unwrap();
        assert!((k.b - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((k.big_b - 2f64.sqrt()).abs() < 1e-15);
        assert!((k.rho_star - (0.5 - 0.5 * 0.5f64.sqrt())).abs() < 1e-15);
        // Flux matching at the critical density.
        assert!((k.c1 * h(k.rho_star) - k.c2 / 4.0).abs() < 1e-12);
        assert!(matches!(
            TwoPhaseConstants::new(1.0, 2.0),
            Err(TwoPhaseError::Ordering { .. })
        ));
    }

    #[test]
    fn homogeneous_constants() {
        let k = TwoPhaseConstants::new(1.5, 1.5).unwrap();
        assert_eq!(k.b, 1.0);
        assert_eq!(k.rho_star, 0.5);
        assert_eq!(k.big_b, 0.0);
    }

    #[test]
    fn phi_examples() {
        assert!((phi(1.0, 1.0, 2.0, 1.0).unwrap() - 4.0).abs() < 1e-14);
        assert!((phi(0.01, 1.0, 2.0, 1.0).unwrap() - 0.605).abs() < 1e-12);
        for (x, y) in [(1.0f64, 1.0f64), (0.3, 2.0), (2.0, 0.1)] {
            let s = x.sqrt() + y.sqrt();
            assert!((phi(x, y, 1.3, 1.3).unwrap() - s * s / 1.3).abs() < 1e-12);
        }
        assert!(phi(1.0, 1.0, 1.0, 2.0).is_err());
        assert!(phi(-1.0, 1.0, 2.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn phi_branches_join(y in 0.01f64..10.0, c2 in 0.1f64..3.0, ratio in 1.0001f64..20.0) {
            let c1 = c2 * ratio;
            let k = TwoPhaseConstants::new(c1, c2).unwrap();
            let x1 = k.b * k.b * y;
            let inner = phi(x1 * (1.0 + 1e-13), y, c1, c2).unwrap();
            prop_assert!((phi(x1, y, c1, c2).unwrap() - inner).abs() < 1e-9 * inner);
            let near = phi(y * (1.0 - 1e-13), y, c1, c2).unwrap();
            prop_assert!((phi(y, y, c1, c2).unwrap() - near).abs() < 1e-9 * near);
        }

        #[test]
        fn phi_is_homogeneous(x in 0.0f64..5.0, y in 0.0f64..5.0, lambda in 0.01f64..100.0) {
            let (c1, c2) = (2.0, 1.0);
            let a = phi(lambda * x, lambda * y, c1, c2).unwrap();
            let b = lambda * phi(x, y, c1, c2).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }

        #[test]
        fn rho_star_range(c2 in 0.1f64..3.0, ratio in 1.0f64..50.0) {
            let k = TwoPhaseConstants::new(c2 * ratio, c2).unwrap();
            prop_assert!(k.rho_star > 0.0 && k.rho_star <= 0.5);
            prop_assert!(k.b > 0.0 && k.b <= 1.0);
            for rho in [0.01, 0.2, 0.5, 0.8, 0.99] {
                let outside = rho <= k.rho_star || rho >= 1.0 - k.rho_star;
                // Sign of D away from its roots.
                if (rho - k.rho_star).abs() > 1e-9 && (rho - 1.0 + k.rho_star).abs() > 1e-9 {
                    prop_assert_eq!(k.d(rho) >= 0.0, outside);
                }
            }
        }
    }
}
