//! Residual of the weak formulation
//! `int int (rho phi_t + c(x) h(rho) phi_x) dx dt + int rho(x, 0) phi(x, 0) dx`
//! against polynomial bump test functions, by midpoint quadrature.

use serde::{Deserialize, Serialize};

use super::profile::{profile, DensityProfile};
use super::{h, TwoPhaseConstants, TwoPhaseError};
use crate::variational::InitialProfile;

/// Space-time density field for the residual.
pub trait DensityField {
    fn density(&self, x: f64, t: f64) -> f64;

    /// Positions at time `t` where the field or its derivative jumps.
    fn breaks(&self, _t: f64) -> Vec<f64> {
        Vec::new()
    }

    /// Moving discontinuities `x = x0 + s t` as `(x0, s)`.
    fn moving_shocks(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }
}

impl<F: Fn(f64, f64) -> f64> DensityField for F {
    fn density(&self, x: f64, t: f64) -> f64 {
        self(x, t)
    }
}

/// Entropy solution from constant initial density, via self-similarity of
/// the profile at `t = 1`.
#[derive(Debug, Clone)]
pub struct ProfileEvolution {
    rho: f64,
    unit: DensityProfile,
}

impl ProfileEvolution {
    pub fn new(rho: f64, c1: f64, c2: f64) -> Result<Self, TwoPhaseError> {
        let (_, unit) = profile(rho, c1, c2, 1.0)?;
        Ok(ProfileEvolution { rho, unit })
    }
}

impl DensityField for ProfileEvolution {
    fn density(&self, x: f64, t: f64) -> f64 {
        if t <= 0.0 {
            self.rho
        } else {
            self.unit.eval(x / t)
        }
    }

    fn breaks(&self, t: f64) -> Vec<f64> {
        self.unit.breakpoints().into_iter().map(|e| e * t).collect()
    }

    fn moving_shocks(&self) -> Vec<(f64, f64)> {
        self.unit
            .jumps()
            .into_iter()
            .filter(|j| j.x != 0.0)
            .map(|j| (0.0, j.x))
            .collect()
    }
}

/// Initial data held fixed for all times; not a solution unless trivial.
#[derive(Debug, Clone)]
pub struct FrozenField(pub InitialProfile);

impl DensityField for FrozenField {
    fn density(&self, x: f64, _t: f64) -> f64 {
        self.0.density(x)
    }

    fn breaks(&self, _t: f64) -> Vec<f64> {
        self.0.breakpoints().to_vec()
    }
}

/// `phi(x, t) = psi((x - xc) / rx) psi((t - tc) / rt)` with `psi(s) = (1 - s^2)^4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub xc: f64,
    pub tc: f64,
    pub rx: f64,
    pub rt: f64,
}

fn psi(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - s * s).powi(4)
    }
}

fn dpsi(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        -8.0 * s * (1.0 - s * s).powi(3)
    }
}

impl Bump {
    pub fn value(&self, x: f64, t: f64) -> f64 {
        psi((x - self.xc) / self.rx) * psi((t - self.tc) / self.rt)
    }

    fn grad(&self, x: f64, t: f64) -> (f64, f64) {
        let (sx, st) = ((x - self.xc) / self.rx, (t - self.tc) / self.rt);
        (
            dpsi(sx) * psi(st) / self.rx,
            psi(sx) * dpsi(st) / self.rt,
        )
    }

    /// Whether the support meets a line `x = x0 + s t` for `t >= 0`.
    pub fn meets(&self, x0: f64, s: f64) -> bool {
        let t_lo = (self.tc - self.rt).max(0.0);
        let t_hi = self.tc + self.rt;
        let (a, b) = (x0 + s * t_lo, x0 + s * t_hi);
        a.min(b) < self.xc + self.rx && a.max(b) > self.xc - self.rx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    /// Cells on each piece of the spatial support between breaks.
    pub nx: usize,
    /// Cells across the temporal support.
    pub nt: usize,
    /// Combine `n` and `2n` as `(4 I(2n) - I(n)) / 3`.
    pub richardson: bool,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            nx: 200,
            nt: 200,
            richardson: false,
        }
    }
}

/// Midpoint rule on `[lo, hi]` split at `cuts`, with `n` cells on every
/// piece. Equal cell counts keep the error a smooth multiple of `n^-2`
/// even as cuts move.
fn split_midpoint(lo: f64, hi: f64, cuts: &[f64], n: usize, f: &dyn Fn(f64) -> f64) -> f64 {
    let mut nodes = vec![lo];
    let mut inner: Vec<f64> = cuts.iter().copied().filter(|&c| c > lo && c < hi).collect();
    inner.sort_by(f64::total_cmp);
    nodes.extend(inner);
    nodes.push(hi);
    let mut total = 0.0;
    for w in nodes.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let dx = len / n as f64;
        total += (0..n).map(|i| f(w[0] + (i as f64 + 0.5) * dx)).sum::<f64>() * dx;
    }
    total
}

fn signed_residual(field: &dyn DensityField, bump: &Bump, k: &TwoPhaseConstants, nx: usize, nt: usize) -> f64 {
    let (xl, xr) = (bump.xc - bump.rx, bump.xc + bump.rx);
    let (tl, tr) = ((bump.tc - bump.rt).max(0.0), bump.tc + bump.rt);
    let row = |t: f64| {
        let mut cuts = field.breaks(t);
        cuts.push(0.0);
        split_midpoint(xl, xr, &cuts, nx, &|x| {
            let rho = field.density(x, t);
            let (px, pt) = bump.grad(x, t);
            let c = if x < 0.0 { k.c1 } else { k.c2 };
            rho * pt + c * h(rho) * px
        })
    };
    let dt = (tr - tl) / nt as f64;
    let mut total = (0..nt).map(|j| row(tl + (j as f64 + 0.5) * dt)).sum::<f64>() * dt;
    if bump.tc - bump.rt < 0.0 {
        let mut cuts = field.breaks(0.0);
        cuts.push(0.0);
        total += split_midpoint(xl, xr, &cuts, nx, &|x| {
            field.density(x, 0.0) * bump.value(x, 0.0)
        });
    }
    total
}

/// Absolute weak-formulation residual of `field` against `bump`.
pub fn weak_residual(
    field: &dyn DensityField,
    bump: &Bump,
    c1: f64,
    c2: f64,
    quad: &Quadrature,
) -> Result<f64, TwoPhaseError> {
    let k = TwoPhaseConstants::new(c1, c2)?;
    let coarse = signed_residual(field, bump, &k, quad.nx, quad.nt);
    Ok(if quad.richardson {
        let fine = signed_residual(field, bump, &k, 2 * quad.nx, 2 * quad.nt);
        ((4.0 * fine - coarse) / 3.0).abs()
    } else {
        coarse.abs()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub cells: Vec<usize>,
    pub residuals: Vec<f64>,
    /// `log2` of consecutive residual ratios.
    pub orders: Vec<f64>,
    /// The finest residual is at the rounding floor, so orders beyond it are meaningless.
    pub at_floor: bool,
}

impl ConvergenceStudy {
    /// Smallest observed order over refinements above the rounding floor.
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Residuals on meshes `n, 2n, 4n, ...` (`levels` of them) and the observed orders.
pub fn residual_order(
    field: &dyn DensityField,
    bump: &Bump,
    c1: f64,
    c2: f64,
    n: usize,
    levels: usize,
) -> Result<ConvergenceStudy, TwoPhaseError> {
    const FLOOR: f64 = 1e-13;
    let mut cells = Vec::new();
    let mut residuals = Vec::new();
    for l in 0..levels.max(2) {
        let m = n << l;
        let quad = Quadrature {
            nx: m,
            nt: m,
            richardson: false,
        };
        cells.push(m);
        residuals.push(weak_residual(field, bump, c1, c2, &quad)?);
    }
    let mut orders = Vec::new();
    for w in residuals.windows(2) {
        if w[1] < FLOOR {
            break;
        }
        orders.push((w[0] / w[1]).log2());
    }
    let at_floor = residuals.iter().any(|&r| r < FLOOR);
    Ok(ConvergenceStudy {
        cells,
        residuals,
        orders,
        at_floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density_has_zero_residual() {
        let zero = |_x: f64, _t: f64| 0.0;
        let b = Bump { xc: 0.1, tc: 0.3, rx: 0.5, rt: 0.5 };
        assert_eq!(weak_residual(&zero, &b, 2.0, 1.0, &Quadrature::default()).unwrap(), 0.0);
    }

    #[test]
    fn bump_derivatives() {
        let b = Bump { xc: 0.2, tc: 1.0, rx: 0.4, rt: 0.3 };
        let (x, t, e) = (0.33, 0.9, 1e-6);
        let (px, pt) = b.grad(x, t);
        assert!((px - (b.value(x + e, t) - b.value(x - e, t)) / (2.0 * e)).abs() < 1e-8);
        assert!((pt - (b.value(x, t + e) - b.value(x, t - e)) / (2.0 * e)).abs() < 1e-8);
        assert!(b.meets(0.0, 0.5));
        assert!(!b.meets(0.0, -1.0));
    }

    #[test]
    fn exact_solution_converges_second_order() {
        let field = ProfileEvolution::new(0.3, 2.0, 1.0).unwrap();
        // Covers the interface and the fan.
        let b = Bump { xc: 0.3, tc: 1.0, rx: 0.4, rt: 0.4 };
        assert!(field.moving_shocks().iter().all(|&(x0, s)| !b.meets(x0, s)));
        let study = residual_order(&field, &b, 2.0, 1.0, 40, 3).unwrap();
        assert!(study.residuals[2] < 1e-4, "{study:?}");
        assert!(!study.at_floor && study.min_order() > 1.8, "{study:?}");
    }

    #[test]
    fn initial_layer_is_included() {
        let field = ProfileEvolution::new(0.7, 2.0, 1.0).unwrap();
        let b = Bump { xc: 0.5, tc: 0.1, rx: 0.3, rt: 0.3 };
        let r = weak_residual(&field, &b, 2.0, 1.0, &Quadrature { nx: 400, nt: 400, richardson: true }).unwrap();
        assert!(r < 1e-8, "{r}");
    }

    #[test]
    fn frozen_data_does_not_converge_to_zero() {
        let (c1, c2, rho) = (2.0, 1.0, 0.3);
        let frozen = FrozenField(InitialProfile::constant(rho).unwrap());
        let b = Bump { xc: 0.0, tc: 1.0, rx: 0.5, rt: 0.5 };
        let study = residual_order(&frozen, &b, c1, c2, 40, 3).unwrap();
        // int phi(0, t) dt = rt * int psi = rt * 256/315.
        let expect = (c1 - c2) * h(rho) * 0.5 * 256.0 / 315.0;
        for r in &study.residuals {
            assert!((r - expect).abs() < 1e-3 * expect, "{r} vs {expect}");
        }
    }
}
