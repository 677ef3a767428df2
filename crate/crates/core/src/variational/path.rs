//! Hydrodynamic height through the path formulation
//! `v(x, t) = sup_w { v0(w(0)) - int_0^t c(w) g(w' / c(w)) ds }`.
//!
//! For a fixed starting point the optimal path crosses each interval
//! between discontinuities in a straight line and rests at most at one
//! column (where the lsc rate makes resting cheapest). Crossing distance
//! `d` at rate `c` in time `tau` costs `max(0, -d)` when
//! `tau <= |d| / c` and `(c tau - d)^2 / (4 c tau)` beyond, so the time
//! budget is spread by equalizing marginal costs.

use serde::{Deserialize, Serialize};

use super::gamma_q::{candidate_walks, Segment, Walk};
use super::hydro::{maximize_over_start, HydroOptions, HydroValue};
use super::initial::InitialProfile;
use super::VariationalError;
use crate::speed::SpeedFunction;

/// Piecewise-linear path `w` on `[0, t]`, linear between vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityPath {
    pub break_times: Vec<f64>,
    pub positions: Vec<f64>,
}

struct Schedule {
    cost: f64,
    times: Vec<f64>,
    rest: f64,
}

fn crossing_cost(seg: &Segment, tau: f64) -> f64 {
    let fast = seg.d.abs() / seg.rate;
    if tau <= fast {
        (-seg.d).max(0.0)
    } else {
        let e = seg.rate * tau - seg.d;
        e * e / (4.0 * seg.rate * tau)
    }
}

/// Crossing time at which the marginal cost `c/4 (1 - (d / c tau)^2)` equals `mu`.
fn crossing_time(seg: &Segment, mu: f64) -> f64 {
    let s = 1.0 - 4.0 * mu / seg.rate;
    if s <= 0.0 {
        f64::INFINITY
    } else {
        seg.d.abs() / (seg.rate * s.sqrt())
    }
}

fn schedule(segments: &[Segment], rest_rate: Option<f64>, t: f64) -> Schedule {
    // Linear options: resting at the dwell column, or a zero-length crossing.
    let mut linear = rest_rate.map(|k| (k / 4.0, None));
    for (s, seg) in segments.iter().enumerate() {
        if seg.d == 0.0 && linear.is_none_or(|(m, _)| seg.rate / 4.0 < m) {
            linear = Some((seg.rate / 4.0, Some(s)));
        }
    }
    let curved: Vec<usize> = (0..segments.len()).filter(|&s| segments[s].d != 0.0).collect();
    let finish = |mut times: Vec<f64>, extra: f64| {
        let mut cost: f64 = curved
            .iter()
            .map(|&s| crossing_cost(&segments[s], times[s]))
            .sum();
        let mut rest = 0.0;
        if extra > 0.0 {
            let (m, idx) = linear.expect("extra time needs a linear option");
            cost += m * extra;
            match idx {
                Some(s) => times[s] += extra,
                None => rest = extra,
            }
        }
        Schedule { cost, times, rest }
    };

    if curved.is_empty() {
        return finish(vec![0.0; segments.len()], t);
    }
    let fastest: f64 = curved
        .iter()
        .map(|&s| segments[s].d.abs() / segments[s].rate)
        .sum();
    if t <= fastest {
        let scale = t / fastest;
        let times = (0..segments.len())
            .map(|s| segments[s].d.abs() / segments[s].rate * scale)
            .collect();
        return finish(times, 0.0);
    }
    let total = |mu: f64| curved.iter().map(|&s| crossing_time(&segments[s], mu)).sum::<f64>();
    let times_at = |mu: f64| -> Vec<f64> {
        (0..segments.len())
            .map(|s| if segments[s].d == 0.0 { 0.0 } else { crossing_time(&segments[s], mu) })
            .collect()
    };
    let cap = curved
        .iter()
        .map(|&s| segments[s].rate / 4.0)
        .fold(f64::INFINITY, f64::min);
    if let Some((m, _)) = linear {
        if m < cap {
            let used = total(m);
            if used <= t {
                return finish(times_at(m), t - used);
            }
        }
    }
    let mut lo = 0.0;
    let mut hi = linear.map_or(cap, |(m, _)| m.min(cap));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) > t {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let mut times = times_at(lo);
    let residual = t - times.iter().sum::<f64>();
    if let Some(&s) = curved.iter().max_by(|&&a, &&b| times[a].total_cmp(&times[b])) {
        times[s] += residual.max(0.0);
    }
    finish(times, 0.0)
}

fn best_walk(x: f64, t: f64, q: f64, speed: &SpeedFunction) -> (f64, Walk, Schedule) {
    let rate_at = |p: f64| speed.eval(p);
    // Paths run from q to x; the walk builder works in the same frame.
    let columns: Vec<(f64, f64)> = (0..speed.breakpoints().len())
        .map(|k| (speed.breakpoints()[k], speed.breakpoint_rate(k)))
        .collect();
    let walks = candidate_walks(q, x, &columns, &rate_at);
    walks
        .into_iter()
        .map(|w| {
            let sch = schedule(&w.segments, w.dwell.map(|d| d.1), t);
            (sch.cost, w, sch)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least the direct walk")
}

/// Least cost of moving from `q` at time 0 to `x` at time `t`.
pub(crate) fn path_cost(x: f64, t: f64, q: f64, speed: &SpeedFunction) -> f64 {
    best_walk(x, t, q, speed).0
}

/// `v(x, t)` via the path formulation; also returns an optimal path.
pub fn hydro_v_path(
    x: f64,
    t: f64,
    speed: &SpeedFunction,
    rho0: &InitialProfile,
    opts: &HydroOptions,
) -> Result<(HydroValue, VelocityPath), VariationalError> {
    if !(t > 0.0) {
        return Err(VariationalError::Time(t));
    }
    let f = |q: f64| -> Result<f64, VariationalError> { Ok(rho0.v0(q) - path_cost(x, t, q, speed)) };
    let value = maximize_over_start(&f, x, t, speed, rho0, opts)?;

    let (_, walk, sch) = best_walk(x, t, value.q_star, speed);
    let mut break_times = vec![0.0];
    let mut positions = vec![walk.points[0]];
    let mut clock = 0.0;
    let dwell_at = walk.dwell.map(|d| d.0);
    for k in 0..walk.points.len() {
        if dwell_at == Some(k) && sch.rest > 0.0 {
            clock += sch.rest;
            break_times.push(clock);
            positions.push(walk.points[k]);
        }
        if k < walk.segments.len() {
            clock += sch.times[k];
            break_times.push(clock);
            positions.push(walk.points[k + 1]);
        }
    }
    *break_times.last_mut().unwrap() = t;
    Ok((value, VelocityPath { break_times, positions }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::{g_wedge, hydro_v_with};

    #[test]
    fn straight_path_cost_in_constant_speed() {
        let speed = SpeedFunction::constant(1.5).unwrap();
        for (x, q, t) in [(0.3, 0.0, 1.0), (-0.4, 0.5, 0.7), (2.0, 0.1, 0.5), (0.0, 0.0, 2.0)] {
            let expect = 1.5 * t * g_wedge((x - q) / (1.5 * t));
            assert!((path_cost(x, t, q, &speed) - expect).abs() < 1e-12, "({x},{q},{t})");
        }
    }

    #[test]
    fn resting_at_slow_interface() {
        let speed = SpeedFunction::two_phase(2.0, 1.0).unwrap();
        // Standing still at the origin costs c(0)/4 = 1/4 per unit time.
        assert!((path_cost(0.0, 3.0, 0.0, &speed) - 0.75).abs() < 1e-12);
        // Left of the origin, walking to the interface to rest beats staying put.
        let stay = 2.0 * 3.0 * g_wedge(0.0);
        assert!(path_cost(-0.1, 3.0, -0.1, &speed) < stay);
    }

    #[test]
    fn dense_search_over_rest_time() {
        let (c1, c2) = (2.0, 1.0);
        let speed = SpeedFunction::two_phase(c1, c2).unwrap();
        let (x, q, t) = (-0.4, -0.9, 1.0);
        // Move right to 0 in time a, rest r, move left to x in the remaining time.
        let mut best = c1 * t * g_wedge((x - q) / (c1 * t));
        let m = 1500;
        for i in 1..m {
            for j in 0..(m - i) {
                let a = t * i as f64 / m as f64;
                let r = t * j as f64 / m as f64;
                let b = t - a - r;
                if b <= 0.0 {
                    continue;
                }
                let cost = c1 * a * g_wedge(-q / (c1 * a)) + r * c2 / 4.0 + c1 * b * g_wedge(x / (c1 * b));
                best = best.min(cost);
            }
        }
        let ours = path_cost(x, t, q, &speed);
        assert!(ours <= best + 1e-12);
        assert!(best - ours < 1e-4, "{ours} vs {best}");
    }

    #[test]
    fn envelope_and_path_forms_agree() {
        let speed = SpeedFunction::two_phase(2.0, 1.0).unwrap();
        let opts = HydroOptions::default();
        for rho in [0.1, 0.3, 0.7] {
            let p = InitialProfile::constant(rho).unwrap();
            for x in [-1.2, -0.3, 0.0, 0.4, 1.1] {
                let env = hydro_v_with(x, 1.0, &speed, &p, &opts).unwrap().v;
                let (path, w) = hydro_v_path(x, 1.0, &speed, &p, &opts).unwrap();
                assert!((env - path.v).abs() < 1e-6, "rho {rho} x {x}: {env} vs {}", path.v);
                assert_eq!(*w.positions.last().unwrap(), x);
                assert_eq!(*w.break_times.last().unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn path_form_on_three_step_speed() {
        let speed = SpeedFunction::new(vec![-0.5, 0.5], vec![1.0, 0.3, 1.2]).unwrap();
        let p = InitialProfile::new(vec![0.0], vec![0.6, 0.2]).unwrap();
        let opts = HydroOptions::default();
        for x in [-1.0, 0.0, 0.8] {
            let env = hydro_v_with(x, 0.8, &speed, &p, &opts).unwrap().v;
            let (path, _) = hydro_v_path(x, 0.8, &speed, &p, &opts).unwrap();
            assert!((env - path.v).abs() < 1e-6, "x {x}: {env} vs {}", path.v);
        }
    }
}
