//! Inhomogeneous passage time `Gamma^q(x, y)` for step speed functions.
//!
//! For a step speed the supremum runs over paths that cross each interval
//! between discontinuity columns in a straight segment and climb
//! vertically along at most one column. Concentrating all vertical motion
//! on the visited column with the smallest rate never loses value, and a
//! back-and-forth excursion without a dwell is dominated by climbing at its
//! turning column, so the candidates are the walks
//! `0 -> p* -> x` (monotone on each leg) for every column `p*`, plus the
//! direct monotone walk. For a fixed walk the heights solve a separable
//! concave program, handled exactly by bisection on its Lagrange
//! multiplier.

use serde::{Deserialize, Serialize};

use super::{gamma_unchecked, VariationalError, WedgePoint};
use crate::speed::SpeedFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaQOptions {
    /// Relative tolerance of the multiplier bisection.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Walks with more segments than this are skipped and reported.
    pub max_segments: usize,
}

impl Default for GammaQOptions {
    fn default() -> Self {
        GammaQOptions {
            rel_tol: 1e-14,
            max_iter: 300,
            max_segments: 10_000,
        }
    }
}

/// Piecewise-linear wedge path, linear between vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroPath {
    pub break_times: Vec<f64>,
    pub vertices: Vec<WedgePoint>,
}

impl MacroPath {
    fn from_vertices(vertices: Vec<WedgePoint>) -> MacroPath {
        let m = vertices.len().saturating_sub(1).max(1);
        let break_times = (0..vertices.len()).map(|k| k as f64 / m as f64).collect();
        MacroPath {
            break_times,
            vertices,
        }
    }

    /// Value of the path functional `sum gamma(dx, dy) / c(x1 - q)` with the
    /// rate of each segment read at its midpoint (at its column if vertical).
    pub fn value(&self, speed: &SpeedFunction, q: f64) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| {
                let (dx, dy) = (w[1].x - w[0].x, w[1].y - w[0].y);
                let rate = speed.eval(0.5 * (w[0].x + w[1].x) - q);
                gamma_unchecked(dx, dy) / rate
            })
            .sum()
    }
}

/// Result of a `Gamma^q` evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaQ {
    pub value: f64,
    pub path: MacroPath,
    /// False if a multiplier bisection hit its iteration cap or a walk was
    /// skipped for exceeding `max_segments`.
    pub converged: bool,
    pub candidates: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    pub d: f64,
    pub rate: f64,
}

/// Candidate route: the turning points in travel order and an optional
/// column where all vertical motion happens.
#[derive(Debug, Clone)]
pub(crate) struct Walk {
    pub points: Vec<f64>,
    pub segments: Vec<Segment>,
    /// Index into `points` and the lsc rate at that column.
    pub dwell: Option<(usize, f64)>,
}

/// Builds the walks `start -> column -> end` for each column (plus the
/// direct walk) in a coordinate frame where the speed is `rate_at`.
/// Columns come with their own rate, so a climb there never depends on
/// which side of the discontinuity a rounded position lands.
pub(crate) fn candidate_walks(
    start: f64,
    end: f64,
    columns: &[(f64, f64)],
    rate_at: &dyn Fn(f64) -> f64,
) -> Vec<Walk> {
    let mut walks = Vec::with_capacity(columns.len() + 1);
    walks.push(build_walk(start, end, None, columns, rate_at));
    for k in 0..columns.len() {
        walks.push(build_walk(start, end, Some(k), columns, rate_at));
    }
    walks
}

fn build_walk(
    start: f64,
    end: f64,
    turn: Option<usize>,
    columns: &[(f64, f64)],
    rate_at: &dyn Fn(f64) -> f64,
) -> Walk {
    let mut points = vec![start];
    let mut dwell = None;
    let push_between = |points: &mut Vec<f64>, from: f64, to: f64| {
        if from < to {
            points.extend(columns.iter().map(|c| c.0).filter(|&p| p > from && p < to));
        } else if from > to {
            points.extend(columns.iter().rev().map(|c| c.0).filter(|&p| p < from && p > to));
        }
    };
    match turn {
        None => push_between(&mut points, start, end),
        Some(k) => {
            let (p, rate) = columns[k];
            push_between(&mut points, start, p);
            if p != start {
                points.push(p);
            }
            dwell = Some((points.len() - 1, rate));
            push_between(&mut points, p, end);
        }
    }
    if *points.last().unwrap() != end {
        points.push(end);
    }
    let mut segments: Vec<Segment> = points
        .windows(2)
        .map(|w| Segment {
            d: w[1] - w[0],
            rate: rate_at(0.5 * (w[0] + w[1])),
        })
        .collect();
    if segments.is_empty() && dwell.is_none() {
        // Start and end coincide away from any column: climb in place.
        segments.push(Segment {
            d: 0.0,
            rate: rate_at(start),
        });
        points.push(end);
    }
    Walk {
        points,
        segments,
        dwell,
    }
}

/// Optimal heights for one walk.
pub(crate) struct Allocation {
    pub value: f64,
    pub heights: Vec<f64>,
    pub dwell: f64,
    pub converged: bool,
}

/// Height a curved segment takes when the multiplier is `lambda`; the
/// marginal value `d gamma / db / rate` equals `lambda` there.
#[inline]
fn demand(seg: &Segment, lambda: f64) -> f64 {
    let k = lambda * seg.rate;
    if k <= 4.0 {
        return f64::INFINITY;
    }
    let root = (k * (k - 4.0)).sqrt();
    if seg.d > 0.0 {
        let u = 0.5 * ((k - 2.0) + root);
        seg.d / (u * u - 1.0)
    } else {
        let u = 2.0 / ((k - 2.0) + root);
        (-seg.d / (1.0 - u * u)).max(-seg.d)
    }
}

pub(crate) fn allocate(
    segments: &[Segment],
    dwell_rate: Option<f64>,
    y: f64,
    opts: &GammaQOptions,
) -> Option<Allocation> {
    let lower: Vec<f64> = segments.iter().map(|s| (-s.d).max(0.0)).collect();
    let floor: f64 = lower.iter().sum();
    if y < floor * (1.0 - 1e-13) - 1e-15 {
        return None;
    }
    let mut linear_slope = dwell_rate.map(|k| 4.0 / k);
    let mut linear_index: Option<usize> = None;
    let mut curved_min = 0.0f64;
    let mut has_curved = false;
    for (s, seg) in segments.iter().enumerate() {
        if seg.d == 0.0 {
            let slope = 4.0 / seg.rate;
            if linear_slope.is_none_or(|l| slope > l) {
                linear_slope = Some(slope);
                linear_index = Some(s);
            }
        } else {
            has_curved = true;
            curved_min = curved_min.max(4.0 / seg.rate);
        }
    }

    let finish = |heights: Vec<f64>, linear: f64, converged: bool| {
        let mut value: f64 = segments
            .iter()
            .zip(&heights)
            .map(|(seg, &b)| gamma_unchecked(seg.d, b) / seg.rate)
            .sum();
        let mut heights = heights;
        let mut dwell = 0.0;
        if linear > 0.0 {
            match linear_index {
                Some(s) => {
                    heights[s] += linear;
                    value += 4.0 * linear / segments[s].rate;
                }
                None => {
                    dwell = linear;
                    value += 4.0 * linear / dwell_rate.unwrap();
                }
            }
        }
        Allocation {
            value,
            heights,
            dwell,
            converged,
        }
    };

    let slack = (y - floor).max(0.0);
    if !has_curved {
        let zeros = vec![0.0; segments.len()];
        return Some(finish(zeros, slack, true));
    }
    if slack == 0.0 {
        return Some(finish(lower, 0.0, true));
    }

    let total = |lambda: f64| -> f64 {
        segments
            .iter()
            .zip(&lower)
            .map(|(seg, &lb)| if seg.d == 0.0 { lb } else { demand(seg, lambda) })
            .sum()
    };
    let heights_at = |lambda: f64| -> Vec<f64> {
        segments
            .iter()
            .map(|seg| if seg.d == 0.0 { 0.0 } else { demand(seg, lambda) })
            .collect()
    };

    if let Some(l) = linear_slope {
        if l > curved_min {
            let used = total(l);
            if used <= y {
                return Some(finish(heights_at(l), y - used, true));
            }
        }
    }

    // Bisect for total(lambda) = y on (lo, hi]; total is decreasing.
    let lo_bound = match linear_slope {
        Some(l) => l.max(curved_min),
        None => curved_min,
    };
    let mut lo = lo_bound;
    let mut hi = if lo_bound > 0.0 { lo_bound * 2.0 } else { 1.0 };
    let mut guard = 0;
    while total(hi) > y {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            return Some(finish(lower, 0.0, false));
        }
    }
    let mut converged = false;
    for _ in 0..opts.max_iter {
        let mid = 0.5 * (lo + hi);
        if total(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= opts.rel_tol * hi {
            converged = true;
            break;
        }
    }
    let mut heights = heights_at(hi);
    for (h, &lb) in heights.iter_mut().zip(&lower) {
        *h = h.max(lb);
    }
    // Hand the rounding residual to the tallest curved segment so the
    // heights sum to `y` exactly.
    let residual = y - heights.iter().sum::<f64>();
    if residual != 0.0 {
        let s = (0..segments.len())
            .filter(|&s| segments[s].d != 0.0)
            .max_by(|&a, &b| heights[a].total_cmp(&heights[b]))
            .unwrap();
        heights[s] = (heights[s] + residual).max(lower[s]);
    }
    Some(finish(heights, 0.0, converged))
}

/// `Gamma^q(x, y)` with default options.
pub fn gamma_q(x: f64, y: f64, speed: &SpeedFunction, q: f64) -> Result<GammaQ, VariationalError> {
    gamma_q_with(x, y, speed, q, &GammaQOptions::default())
}

pub fn gamma_q_with(
    x: f64,
    y: f64,
    speed: &SpeedFunction,
    q: f64,
    opts: &GammaQOptions,
) -> Result<GammaQ, VariationalError> {
    WedgePoint::new(x, y)?;
    let columns: Vec<(f64, f64)> = (0..speed.breakpoints().len())
        .map(|k| (speed.breakpoints()[k] + q, speed.breakpoint_rate(k)))
        .collect();
    let rate_at = |p: f64| speed.eval(p - q);
    let walks = candidate_walks(0.0, x, &columns, &rate_at);

    let mut best: Option<(f64, &Walk, Allocation)> = None;
    let mut converged = true;
    let mut candidates = 0;
    for walk in &walks {
        if walk.segments.len() > opts.max_segments {
            converged = false;
            continue;
        }
        let Some(alloc) = allocate(&walk.segments, walk.dwell.map(|d| d.1), y, opts) else {
            continue;
        };
        candidates += 1;
        converged &= alloc.converged;
        if best.as_ref().is_none_or(|b| alloc.value > b.0) {
            best = Some((alloc.value, walk, alloc));
        }
    }
    let (value, walk, alloc) = best.ok_or_else(|| {
        VariationalError::Argument(format!("no admissible walk reaches ({x}, {y})"))
    })?;

    let mut vertices = vec![WedgePoint { x: 0.0, y: 0.0 }];
    let mut pos = WedgePoint { x: 0.0, y: 0.0 };
    let dwell_at = walk.dwell.map(|d| d.0);
    let mut push = |dx: f64, dy: f64, vertices: &mut Vec<WedgePoint>| {
        if dx != 0.0 || dy != 0.0 {
            pos = WedgePoint {
                x: pos.x + dx,
                y: pos.y + dy,
            };
            vertices.push(pos);
        }
    };
    for k in 0..walk.points.len() {
        if dwell_at == Some(k) {
            push(0.0, alloc.dwell, &mut vertices);
        }
        if k < walk.segments.len() {
            push(walk.segments[k].d, alloc.heights[k], &mut vertices);
        }
    }
    // Land exactly on the target despite accumulated rounding.
    if vertices.len() > 1 {
        *vertices.last_mut().unwrap() = WedgePoint { x, y };
    }
    Ok(GammaQ {
        value,
        path: MacroPath::from_vertices(vertices),
        converged,
        candidates,
    })
}
