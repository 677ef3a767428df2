//! Hydrodynamic height `v(x, t)` through the envelope formula
//! `v(x, t) = sup_q { v0(q) - g^{-q}(x - q, t) }`.

use super::initial::InitialProfile;
use super::level::{g_q_level_with, LevelOptions};
use super::VariationalError;
use crate::speed::SpeedFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroOptions {
    /// Grid points of the coarse scan over the starting point `q`.
    pub grid: usize,
    /// Number of best local maxima refined by golden-section search.
    pub refine: usize,
    /// Golden-section tolerance in `q`.
    pub q_tol: f64,
    /// Maximum number of window doublings when the maximizer sits on an edge.
    pub max_widen: u32,
    pub level: LevelOptions,
}

impl Default for HydroOptions {
    fn default() -> Self {
        HydroOptions {
            grid: 240,
            refine: 4,
            q_tol: 1e-10,
            max_widen: 6,
            level: LevelOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroValue {
    pub v: f64,
    /// Maximizing starting point (smallest among ties).
    pub q_star: f64,
    pub window: (f64, f64),
    pub widened: u32,
}

pub(crate) struct Maximum {
    pub q: f64,
    pub value: f64,
    pub at_edge: bool,
}

fn better(value: f64, q: f64, best: &Option<Maximum>) -> bool {
    match best {
        None => true,
        Some(b) => {
            let eps = 1e-12 * b.value.abs().max(1.0);
            value > b.value + eps || ((value - b.value).abs() <= eps && q < b.q)
        }
    }
}

/// Coarse grid scan, golden-section refinement of the best local maxima,
/// plus explicit candidate points.
pub(crate) fn maximize_window(
    f: &dyn Fn(f64) -> Result<f64, VariationalError>,
    lo: f64,
    hi: f64,
    opts: &HydroOptions,
    candidates: &[f64],
) -> Result<Maximum, VariationalError> {
    let m = opts.grid.max(4);
    let h = (hi - lo) / m as f64;
    let qs: Vec<f64> = (0..=m).map(|i| lo + i as f64 * h).collect();
    let vals = qs.iter().map(|&q| f(q)).collect::<Result<Vec<_>, _>>()?;

    let mut peaks: Vec<usize> = (0..=m)
        .filter(|&i| {
            let left = if i > 0 { vals[i - 1] } else { f64::NEG_INFINITY };
            let right = if i < m { vals[i + 1] } else { f64::NEG_INFINITY };
            vals[i] >= left && vals[i] >= right
        })
        .collect();
    peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    peaks.truncate(opts.refine.max(1));

    let mut best: Option<Maximum> = None;
    let consider = |q: f64, value: f64, best: &mut Option<Maximum>| {
        if better(value, q, best) {
            *best = Some(Maximum {
                q,
                value,
                at_edge: false,
            });
        }
    };
    for (i, &q) in qs.iter().enumerate() {
        consider(q, vals[i], &mut best);
    }
    for &i in &peaks {
        let a = if i > 0 { qs[i - 1] } else { qs[0] };
        let b = if i < m { qs[i + 1] } else { qs[m] };
        let (q, value) = golden_max(f, a, b, opts.q_tol)?;
        consider(q, value, &mut best);
    }
    for &q in candidates {
        if q >= lo && q <= hi {
            consider(q, f(q)?, &mut best);
        }
    }
    let mut best = best.expect("grid is nonempty");
    // On an edge only if the objective is still rising towards it; a flat
    // plateau reaching the edge is a tie, not a truncation.
    let eps = 1e-12 * best.value.abs().max(1.0);
    best.at_edge = (best.q - lo < h && vals[0] > vals[1] + eps)
        || (hi - best.q < h && vals[m] > vals[m - 1] + eps);
    Ok(best)
}

fn golden_max(
    f: &dyn Fn(f64) -> Result<f64, VariationalError>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64), VariationalError> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Maximizes `f` over `q`, starting from the window `x -/+ (c_max t + 1)`
/// and doubling it (with a warning) while the maximizer sits on an edge.
pub(crate) fn maximize_over_start(
    f: &dyn Fn(f64) -> Result<f64, VariationalError>,
    x: f64,
    t: f64,
    speed: &SpeedFunction,
    rho0: &InitialProfile,
    opts: &HydroOptions,
) -> Result<HydroValue, VariationalError> {
    let mut half = speed.max_rate() * t + 1.0;
    let mut candidates: Vec<f64> = speed.breakpoints().to_vec();
    candidates.extend_from_slice(rho0.breakpoints());
    candidates.push(x);
    let mut widened = 0;
    loop {
        let (lo, hi) = (x - half, x + half);
        let best = maximize_window(f, lo, hi, opts, &candidates)?;
        if !best.at_edge || widened >= opts.max_widen {
            if best.at_edge {
                log::warn!("maximizer of v({x}, {t}) still on the window edge after {widened} doublings");
            }
            return Ok(HydroValue {
                v: best.value,
                q_star: best.q,
                window: (lo, hi),
                widened,
            });
        }
        log::warn!("maximizer of v({x}, {t}) at q = {} on the window edge; widening", best.q);
        half *= 2.0;
        widened += 1;
    }
}

/// `v(x, t)` via the envelope formula with default options.
pub fn hydro_v(
    x: f64,
    t: f64,
    speed: &SpeedFunction,
    rho0: &InitialProfile,
) -> Result<f64, VariationalError> {
    hydro_v_with(x, t, speed, rho0, &HydroOptions::default()).map(|r| r.v)
}

pub fn hydro_v_with(
    x: f64,
    t: f64,
    speed: &SpeedFunction,
    rho0: &InitialProfile,
    opts: &HydroOptions,
) -> Result<HydroValue, VariationalError> {
    if !(t > 0.0) {
        return Err(VariationalError::Time(t));
    }
    let level = opts.level;
    let f = |q: f64| -> Result<f64, VariationalError> {
        Ok(rho0.v0(q) - g_q_level_with(x - q, t, speed, -q, &level)?)
    };
    maximize_over_start(&f, x, t, speed, rho0, opts)
}

/// Central difference `(v(x + h, t) - v(x - h, t)) / 2h`, clipped to `[0, 1]`.
pub fn rho_from_v<F: Fn(f64, f64) -> f64>(v: F, x: f64, t: f64, h: f64) -> f64 {
    ((v(x + h, t) - v(x - h, t)) / (2.0 * h)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::g_wedge;

    /// Homogeneous Hopf-Lax value for constant data: max over the starting
    /// point of `rho q - t c g((x - q) / (t c))`, by dense 1-D search.
    fn homogeneous_oracle(x: f64, t: f64, c: f64, rho: f64) -> f64 {
        let m = 400_000;
        let (lo, hi) = (x - 3.0 * c * t, x + 3.0 * c * t);
        (0..=m)
            .map(|k| {
                let q = lo + (hi - lo) * k as f64 / m as f64;
                rho * q - t * c * g_wedge((x - q) / (t * c))
            })
            .fold(f64::MIN, f64::max)
    }

    #[test]
    fn constant_environment() {
        let c = 1.3;
        let speed = SpeedFunction::constant(c).unwrap();
        for rho in [0.2, 0.5, 0.8] {
            let p = InitialProfile::constant(rho).unwrap();
            for x in [-1.0, 0.0, 0.7] {
                let v = hydro_v(x, 1.0, &speed, &p).unwrap();
                let oracle = homogeneous_oracle(x, 1.0, c, rho);
                assert!((v - oracle).abs() < 1e-6, "rho {rho} x {x}: {v} vs {oracle}");
                // Constant data stays constant: v = rho x - t c rho (1 - rho).
                assert!((v - (rho * x - c * rho * (1.0 - rho))).abs() < 1e-6);
            }
        }
        let half = InitialProfile::constant(0.5).unwrap();
        assert!((hydro_v(0.0, 2.0, &speed, &half).unwrap() + 2.0 * c / 4.0).abs() < 1e-7);
        let low = InitialProfile::constant(0.2).unwrap();
        assert!(hydro_v(0.0, 2.0, &speed, &low).unwrap() > -2.0 * c / 4.0);
    }

    #[test]
    fn small_time_recovers_initial_height() {
        let speed = SpeedFunction::two_phase(2.0, 1.0).unwrap();
        let p = InitialProfile::new(vec![0.0], vec![0.8, 0.2]).unwrap();
        for x in [-0.5, 0.3] {
            let v = hydro_v(x, 1e-5, &speed, &p).unwrap();
            assert!((v - p.v0(x)).abs() < 1e-4);
        }
    }

    #[test]
    fn finite_difference_helper() {
        let lin = |x: f64, _t: f64| 0.37 * x + 2.0;
        for h in [1e-3, 0.1, 2.0] {
            assert!((rho_from_v(lin, 0.4, 1.0, h) - 0.37).abs() < 1e-12);
        }
        let steep = |x: f64, _t: f64| 3.0 * x;
        assert_eq!(rho_from_v(steep, 0.0, 1.0, 0.1), 1.0);
    }

    #[test]
    fn flat_plateau_does_not_widen() {
        let speed = SpeedFunction::constant(1.0).unwrap();
        let empty = InitialProfile::constant(0.0).unwrap();
        let r = hydro_v_with(0.3, 1.0, &speed, &empty, &HydroOptions::default()).unwrap();
        assert_eq!(r.widened, 0);
        assert!(r.v.abs() < 1e-12);
        assert_eq!(r.q_star, r.window.0);
    }
}
