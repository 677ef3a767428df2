use super::gamma_q::{gamma_q_with, GammaQOptions};
use super::VariationalError;
use crate::speed::SpeedFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelOptions {
    /// Absolute bisection tolerance in `y`.
    pub tol: f64,
    pub gamma: GammaQOptions,
}

impl Default for LevelOptions {
    fn default() -> Self {
        LevelOptions {
            tol: 1e-8,
            gamma: GammaQOptions::default(),
        }
    }
}

/// Level curve `g^q(x, t) = inf { y : (x, y) in W, Gamma^q(x, y) >= t }`.
pub fn g_q_level(x: f64, t: f64, speed: &SpeedFunction, q: f64) -> Result<f64, VariationalError> {
    g_q_level_with(x, t, speed, q, &LevelOptions::default())
}

/// Bisection in `y`, using that `Gamma^q(x, .)` is nondecreasing. When the
/// boundary point already takes time `t` or more, returns `max(0, -x)`.
pub fn g_q_level_with(
    x: f64,
    t: f64,
    speed: &SpeedFunction,
    q: f64,
    opts: &LevelOptions,
) -> Result<f64, VariationalError> {
    if !(t > 0.0) {
        return Err(VariationalError::Time(t));
    }
    let gamma = |y: f64| gamma_q_with(x, y, speed, q, &opts.gamma).map(|r| r.value);
    let floor = (-x).max(0.0);
    if gamma(floor)? >= t {
        return Ok(floor);
    }
    // Gamma^q(x, y) >= 4 (y - floor) / c_max, so this bracket always closes.
    let mut width = (t * speed.max_rate() / 4.0).max(opts.tol);
    let mut hi = floor + width;
    while gamma(hi)? < t {
        width *= 2.0;
        hi = floor + width;
    }
    let mut lo = floor;
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        if gamma(mid)? >= t {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::{g_wedge, gamma};

    #[test]
    fn constant_speed_inverts_gamma() {
        let c = 1.7;
        let speed = SpeedFunction::constant(c).unwrap();
        let t = 0.9;
        assert!((g_q_level(0.0, t, &speed, 0.3).unwrap() - c * t / 4.0).abs() < 1e-8);
        for x in [-0.5, 0.2, 1.0] {
            let y = g_q_level(x, t, &speed, 0.0).unwrap();
            if y > (-x).max(0.0) {
                assert!((gamma(x, y).unwrap() / c - t).abs() < 1e-7);
            }
            // Homogeneous wedge shape: g = t c g_wedge(x / (t c)).
            assert!((y - t * c * g_wedge(x / (t * c))).abs() < 1e-7, "x = {x}");
        }
    }

    #[test]
    fn small_time_and_boundary() {
        let speed = SpeedFunction::two_phase(2.0, 1.0).unwrap();
        assert_eq!(g_q_level(0.5, 1e-6, &speed, 0.0).unwrap(), 0.0);
        assert_eq!(g_q_level(-2.0, 0.1, &speed, 0.0).unwrap(), 2.0);
        assert!(g_q_level(0.0, 0.0, &speed, 0.0).is_err());
    }

    #[test]
    fn two_phase_vertical_level() {
        let speed = SpeedFunction::two_phase(2.0, 1.0).unwrap();
        let t = 1.3;
        assert!((g_q_level(0.0, t, &speed, 0.0).unwrap() - t / 4.0).abs() < 1e-8);
    }
}
