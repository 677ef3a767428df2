use serde::{Deserialize, Serialize};

use super::{h, TwoPhaseConstants, TwoPhaseError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PieceKind {
    Plateau(f64),
    /// Rarefaction fan `1/2 (1 - x / (t c))` from the origin.
    Fan { c: f64 },
}

/// Density on the half-open interval `(lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub kind: PieceKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileCase {
    /// `rho < rho*`: left density passes, a raised plateau then a fan on the right.
    Subcritical,
    /// `rho* <= rho <= 1/2`: left shock into the congested plateau `1 - rho*`, fan on the right.
    Critical,
    /// `rho > 1/2`: left shock into `1 - r*`, the right side keeps `rho`.
    Congested,
}

/// Discontinuity with one-sided limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub x: f64,
    pub left: f64,
    pub right: f64,
}

/// Piecewise density at a fixed time; pieces tile the line in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub t: f64,
    pub pieces: Vec<Piece>,
}

impl PieceKind {
    fn at(&self, x: f64, t: f64) -> f64 {
        match *self {
            PieceKind::Plateau(v) => v,
            PieceKind::Fan { c } => 0.5 * (1.0 - x / (t * c)),
        }
    }
}

impl DensityProfile {
    /// Builds a profile from consecutive `(hi, kind)` pairs, the first piece
    /// starting at `-inf`; zero-width pieces are dropped.
    pub fn from_pieces(t: f64, parts: &[(f64, PieceKind)]) -> Self {
        let mut pieces = Vec::with_capacity(parts.len());
        let mut lo = f64::NEG_INFINITY;
        for &(hi, kind) in parts {
            if hi > lo {
                pieces.push(Piece { lo, hi, kind });
                lo = hi;
            }
        }
        DensityProfile { t, pieces }
    }

    /// Density at `x` (left-continuous at piece ends).
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.pieces.partition_point(|p| p.hi < x);
        let p = &self.pieces[k.min(self.pieces.len() - 1)];
        p.kind.at(x, self.t)
    }

    pub fn left_limit(&self, x: f64) -> f64 {
        let k = self.pieces.partition_point(|p| p.hi < x);
        self.pieces[k.min(self.pieces.len() - 1)].kind.at(x, self.t)
    }

    pub fn right_limit(&self, x: f64) -> f64 {
        let k = self.pieces.partition_point(|p| p.hi <= x);
        self.pieces[k.min(self.pieces.len() - 1)].kind.at(x, self.t)
    }

    /// Interior piece ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces[..self.pieces.len() - 1].iter().map(|p| p.hi).collect()
    }

    /// Piece ends where the density actually jumps.
    pub fn jumps(&self) -> Vec<Jump> {
        self.breakpoints()
            .into_iter()
            .filter_map(|x| {
                let (left, right) = (self.left_limit(x), self.right_limit(x));
                ((right - left).abs() > 1e-14).then_some(Jump { x, left, right })
            })
            .collect()
    }

    /// `int_a^b rho(x) dx`, exact piece by piece.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        for p in &self.pieces {
            let (lo, hi) = (p.lo.max(a), p.hi.min(b));
            if hi <= lo {
                continue;
            }
            total += match p.kind {
                PieceKind::Plateau(v) => v * (hi - lo),
                PieceKind::Fan { c } => {
                    0.5 * (hi - lo) - (hi * hi - lo * lo) / (4.0 * self.t * c)
                }
            };
        }
        total
    }
}

/// Which of the three cases applies; at `rho = rho*` and `rho = 1/2` the
/// critical case is used.
pub fn classify(rho: f64, k: &TwoPhaseConstants) -> ProfileCase {
    if rho < k.rho_star {
        ProfileCase::Subcritical
    } else if rho <= 0.5 {
        ProfileCase::Critical
    } else {
        ProfileCase::Congested
    }
}

/// Entropy solution at time `t` from constant initial density `rho`.
pub fn profile(rho: f64, c1: f64, c2: f64, t: f64) -> Result<(ProfileCase, DensityProfile), TwoPhaseError> {
    let k = TwoPhaseConstants::new(c1, c2)?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(TwoPhaseError::Density(rho));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(TwoPhaseError::Time(t));
    }
    let case = classify(rho, &k);
    let parts: Vec<(f64, PieceKind)> = match case {
        ProfileCase::Subcritical => {
            let r = 0.5 - 0.5 * (1.0 - 4.0 * h(rho) * c1 / c2).sqrt();
            vec![
                (0.0, PieceKind::Plateau(rho)),
                (c2 * (1.0 - 2.0 * r) * t, PieceKind::Plateau(r)),
                (c2 * (1.0 - 2.0 * rho) * t, PieceKind::Fan { c: c2 }),
                (f64::INFINITY, PieceKind::Plateau(rho)),
            ]
        }
        ProfileCase::Critical => vec![
            (-t * c1 * (rho - k.rho_star), PieceKind::Plateau(rho)),
            (0.0, PieceKind::Plateau(1.0 - k.rho_star)),
            ((1.0 - 2.0 * rho) * t * c2, PieceKind::Fan { c: c2 }),
            (f64::INFINITY, PieceKind::Plateau(rho)),
        ],
        ProfileCase::Congested => {
            let r = 0.5 - 0.5 * (1.0 - 4.0 * h(rho) * c2 / c1).sqrt();
            vec![
                (-t * c1 * (rho - r), PieceKind::Plateau(rho)),
                (0.0, PieceKind::Plateau(1.0 - r)),
                (f64::INFINITY, PieceKind::Plateau(rho)),
            ]
        }
    };
    Ok((case, DensityProfile::from_pieces(t, &parts)))
}
