//! Last-passage percolation with inhomogeneous exponential weights.
//!
//! Two lattices share one weight field. The wedge lattice
//! `L = {(i, j) : j >= 1, i >= 1 - j}` uses steps `(1,0)`, `(0,1)` and
//! `(-1,1)` from `(0,1)`; the corner lattice uses up-right steps from
//! `(1,1)`. Every kernel here works in corner coordinates `(a, b) =
//! (i + j, j)`, where a wedge row `j` becomes the contiguous range
//! `a = 1..=u+v` and the wedge steps become `(1,0)`, `(1,1)`, `(0,1)`.

use rayon::prelude::*;
use thiserror::Error;

use crate::rng::{derive_seed, site_exp};
use crate::speed::SpeedFunction;
use crate::stats::Estimate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LppError {
    #[error("weight field covers rows 1..={rows}, columns up to {cols}; need rows {need_rows}, columns {need_cols}")]
    Dimension {
        rows: i64,
        cols: i64,
        need_rows: i64,
        need_cols: i64,
    },
    #[error("({u}, {v}) is not in the wedge lattice (need v >= 1 and u >= 1 - v)")]
    Domain { u: i64, v: i64 },
    #[error("corner lattice target ({m}, {n}) must have both coordinates >= 1")]
    CornerDomain { m: i64, n: i64 },
    #[error("no admissible path reaches ({u}, {v}) inside columns [{lo}, {hi}]")]
    Unreachable { u: i64, v: i64, lo: i64, hi: i64 },
    #[error("invalid argument: {0}")]
    Argument(String),
}

/// Exponential weights `tau(i, j) / c((i - shift) / n)` on the wedge lattice.
///
/// `tau` comes from a counter-based generator keyed by `(seed, i, j)`, so the
/// field is reproducible regardless of evaluation order. The field covers
/// rows `1..=rows` and, in row `j`, columns `1 - j..=cols`.
#[derive(Debug, Clone)]
pub struct WeightField {
    speed: SpeedFunction,
    n: u64,
    shift: i64,
    seed: u64,
    rows: i64,
    cols: i64,
}

impl WeightField {
    pub fn new(
        speed: SpeedFunction,
        n: u64,
        shift: i64,
        seed: u64,
        rows: i64,
        cols: i64,
    ) -> Result<Self, LppError> {
        if n == 0 {
            return Err(LppError::Argument("scale n must be at least 1".into()));
        }
        if rows < 1 {
            return Err(LppError::Argument(format!("rows must be >= 1, got {rows}")));
        }
        Ok(WeightField {
            speed,
            n,
            shift,
            seed,
            rows,
            cols,
        })
    }

    /// Smallest field that holds every admissible path to wedge site `(u, v)`.
    pub fn for_wedge(
        speed: SpeedFunction,
        n: u64,
        shift: i64,
        seed: u64,
        u: i64,
        v: i64,
    ) -> Result<Self, LppError> {
        check_wedge(u, v)?;
        Self::new(speed, n, shift, seed, v, u + v - 1)
    }

    /// Smallest field that holds the corner rectangle `[m] x [rows]`.
    pub fn for_corner(
        speed: SpeedFunction,
        n: u64,
        shift: i64,
        seed: u64,
        m: i64,
        rows: i64,
    ) -> Result<Self, LppError> {
        check_corner(m, rows)?;
        Self::new(speed, n, shift, seed, rows, m - 1)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        WeightField {
            seed,
            ..self.clone()
        }
    }

    pub fn speed(&self) -> &SpeedFunction {
        &self.speed
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scale(&self) -> u64 {
        self.n
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    /// `(rows, cols)`: the largest row index and the largest column index.
    pub fn shape(&self) -> (i64, i64) {
        (self.rows, self.cols)
    }

    pub fn contains(&self, i: i64, j: i64) -> bool {
        j >= 1 && j <= self.rows && i >= 1 - j && i <= self.cols
    }

    /// Jump rate `c((i - shift) / n)` governing column `i`.
    pub fn rate(&self, i: i64) -> f64 {
        self.speed.eval((i - self.shift) as f64 / self.n as f64)
    }

    /// Weight at `(i, j)`; positive with mean `1 / rate(i)`.
    #[inline]
    pub fn weight(&self, i: i64, j: i64) -> f64 {
        site_exp(self.seed, i, j) / self.rate(i)
    }

    fn inverse_rates(&self, i_lo: i64, i_hi: i64) -> Vec<f64> {
        (i_lo..=i_hi).map(|i| 1.0 / self.rate(i)).collect()
    }

    fn require(&self, need_rows: i64, need_cols: i64) -> Result<(), LppError> {
        if self.rows < need_rows || self.cols < need_cols {
            return Err(LppError::Dimension {
                rows: self.rows,
                cols: self.cols,
                need_rows,
                need_cols,
            });
        }
        Ok(())
    }
}

fn check_wedge(u: i64, v: i64) -> Result<(), LppError> {
    if v < 1 || u < 1 - v {
        return Err(LppError::Domain { u, v });
    }
    Ok(())
}

fn check_corner(m: i64, n: i64) -> Result<(), LppError> {
    if m < 1 || n < 1 {
        return Err(LppError::CornerDomain { m, n });
    }
    Ok(())
}

/// Corner-growth last-passage time `G(m, rows)` with weights
/// `Y(a, b) = field.weight(a - b, b)`.
///
/// Row sweep with a single buffer of length `m + 1`.
pub fn corner_growth(m: i64, rows: i64, field: &WeightField) -> Result<f64, LppError> {
    check_corner(m, rows)?;
    field.require(rows, m - 1)?;
    let inv = field.inverse_rates(1 - rows, m - 1);
    let off = rows - 1;
    let seed = field.seed;
    let mut g = vec![0.0f64; m as usize + 1];
    for b in 1..=rows {
        for a in 1..=m {
            let i = a - b;
            let y = site_exp(seed, i, b) * inv[(i + off) as usize];
            let au = a as usize;
            g[au] = y + g[au - 1].max(g[au]);
        }
    }
    Ok(g[m as usize])
}

/// Wedge last-passage time `T(u, v)`.
pub fn wedge_passage(u: i64, v: i64, field: &WeightField) -> Result<f64, LppError> {
    check_wedge(u, v)?;
    field.require(v, u + v - 1)?;
    let width = u + v;
    let inv = field.inverse_rates(1 - v, u + v - 1);
    let off = v - 1;
    let seed = field.seed;
    let mut t = vec![0.0f64; width as usize + 1];
    for b in 1..=v {
        // `diag` holds the previous row's value one column to the left.
        let mut diag = 0.0f64;
        for a in 1..=width {
            let i = a - b;
            let w = site_exp(seed, i, b) * inv[(i + off) as usize];
            let au = a as usize;
            let up = t[au];
            t[au] = w + t[au - 1].max(diag).max(up);
            diag = up;
        }
    }
    Ok(t[width as usize])
}

/// Wedge last-passage time restricted to paths whose interior sites lie in
/// columns `lo..=hi`. The start `(0,1)` and the target may sit outside, so
/// the first and the last step may cross the region boundary.
pub fn wedge_passage_constrained(
    u: i64,
    v: i64,
    field: &WeightField,
    lo: i64,
    hi: i64,
) -> Result<f64, LppError> {
    check_wedge(u, v)?;
    field.require(v, u + v - 1)?;
    if lo > hi {
        return Err(LppError::Argument(format!("empty column range [{lo}, {hi}]")));
    }
    let value = masked_passage(
        (0, 1),
        field.weight(0, 1),
        (u, v),
        |i, j| field.weight(i, j),
        |i, _| i >= lo && i <= hi,
    );
    if value == f64::NEG_INFINITY {
        return Err(LppError::Unreachable { u, v, lo, hi });
    }
    Ok(value)
}

/// Wedge DP over an arbitrary weight function, with the usual zero boundary.
pub fn wedge_passage_with<W: Fn(i64, i64) -> f64>(u: i64, v: i64, weight: W) -> Result<f64, LppError> {
    check_wedge(u, v)?;
    let width = u + v;
    let mut t = vec![0.0f64; width as usize + 1];
    for b in 1..=v {
        let mut diag = 0.0f64;
        for a in 1..=width {
            let au = a as usize;
            let up = t[au];
            t[au] = weight(a - b, b) + t[au - 1].max(diag).max(up);
            diag = up;
        }
    }
    Ok(t[width as usize])
}

/// Corner DP over an arbitrary weight function `Y(a, b)`.
pub fn corner_growth_with<W: Fn(i64, i64) -> f64>(m: i64, rows: i64, weight: W) -> Result<f64, LppError> {
    check_corner(m, rows)?;
    let mut g = vec![0.0f64; m as usize + 1];
    for b in 1..=rows {
        for a in 1..=m {
            let au = a as usize;
            g[au] = weight(a, b) + g[au - 1].max(g[au]);
        }
    }
    Ok(g[m as usize])
}

/// Longest path from `start` to `target` over wedge sites for which
/// `allowed(i, j)` holds (start and target are always allowed). The start
/// site carries `start_value` in place of its weight; unreachable targets
/// return `-inf`.
pub fn masked_passage<W, A>(
    start: (i64, i64),
    start_value: f64,
    target: (i64, i64),
    weight: W,
    allowed: A,
) -> f64
where
    W: Fn(i64, i64) -> f64,
    A: Fn(i64, i64) -> bool,
{
    let (u, v) = target;
    let (si, sj) = start;
    if v < sj || u + v < si + sj || sj < 1 || si < 1 - sj || u < 1 - v {
        return f64::NEG_INFINITY;
    }
    let width = u + v;
    let s_a = si + sj;
    let mut t = vec![f64::NEG_INFINITY; width as usize + 1];
    for b in 1..=v {
        let mut diag = f64::NEG_INFINITY;
        if b < sj {
            continue;
        }
        for a in 1..=width {
            let i = a - b;
            let au = a as usize;
            let up = t[au];
            let value = if b == sj && a == s_a {
                start_value
            } else if (i, b) == target || allowed(i, b) {
                let best = t[au - 1].max(diag).max(up);
                if best == f64::NEG_INFINITY {
                    best
                } else {
                    weight(i, b) + best
                }
            } else {
                f64::NEG_INFINITY
            };
            t[au] = value;
            diag = up;
        }
    }
    t[width as usize]
}

/// Wedge steps in lattice coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WedgeStep {
    Right,
    Up,
    UpLeft,
}

impl WedgeStep {
    pub fn delta(self) -> (i64, i64) {
        match self {
            WedgeStep::Right => (1, 0),
            WedgeStep::Up => (0, 1),
            WedgeStep::UpLeft => (-1, 1),
        }
    }
}

/// Maximizing wedge path with its value.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedPath {
    pub value: f64,
    /// Sites from `(0,1)` to the target, inclusive.
    pub sites: Vec<(i64, i64)>,
}

impl TracedPath {
    pub fn steps(&self) -> Vec<WedgeStep> {
        self.sites
            .windows(2)
            .map(|w| match (w[1].0 - w[0].0, w[1].1 - w[0].1) {
                (1, 0) => WedgeStep::Right,
                (0, 1) => WedgeStep::Up,
                (-1, 1) => WedgeStep::UpLeft,
                d => unreachable!("non-admissible step {d:?}"),
            })
            .collect()
    }
}

/// Wedge DP that also records an argmax path. Stores one byte per site.
pub fn wedge_passage_traced<W: Fn(i64, i64) -> f64>(
    u: i64,
    v: i64,
    weight: W,
) -> Result<TracedPath, LppError> {
    check_wedge(u, v)?;
    let width = (u + v) as usize;
    // 0: (a-1, b) = wedge Right; 1: (a-1, b-1) = wedge Up; 2: (a, b-1) = wedge UpLeft; 3: boundary.
    let mut choice = vec![3u8; width * v as usize];
    let mut t = vec![0.0f64; width + 1];
    for b in 1..=v {
        let mut diag = 0.0f64;
        let row = (b - 1) as usize * width;
        for a in 1..=width {
            let up = t[a];
            let left = t[a - 1];
            let left_interior = a > 1;
            let diag_interior = a > 1 && b > 1;
            let up_interior = b > 1;
            let mut best = 0.0;
            let mut pick = 3u8;
            for (val, interior, code) in [
                (left, left_interior, 0u8),
                (diag, diag_interior, 1),
                (up, up_interior, 2),
            ] {
                if interior && (pick == 3 || val > best) {
                    best = val;
                    pick = code;
                }
            }
            t[a] = weight(a as i64 - b, b) + best.max(0.0);
            choice[row + a - 1] = pick;
            diag = up;
        }
    }
    let mut sites = Vec::new();
    let (mut a, mut b) = (width, v as usize);
    loop {
        sites.push((a as i64 - b as i64, b as i64));
        match choice[(b - 1) * width + a - 1] {
            0 => a -= 1,
            1 => {
                a -= 1;
                b -= 1
            }
            2 => b -= 1,
            _ => break,
        }
    }
    sites.reverse();
    Ok(TracedPath {
        value: t[width],
        sites,
    })
}

const PAR_MIN_LEN: usize = 1024;

/// Corner growth by anti-diagonal wavefront; cells on a diagonal are
/// independent and long diagonals are split across rayon workers. Gives the
/// same bits as [`corner_growth`].
pub fn corner_growth_wavefront(m: i64, rows: i64, field: &WeightField) -> Result<f64, LppError> {
    check_corner(m, rows)?;
    field.require(rows, m - 1)?;
    let inv = field.inverse_rates(1 - rows, m - 1);
    let off = rows - 1;
    let seed = field.seed;
    let len = rows as usize + 1;
    let mut prev = vec![0.0f64; len];
    let mut cur = vec![0.0f64; len];
    for d in 2..=(m + rows) {
        let b_lo = 1.max(d - m);
        let b_hi = rows.min(d - 1);
        let prev_ref = &prev;
        let cell = |b: i64| {
            let a = d - b;
            let i = a - b;
            let y = site_exp(seed, i, b) * inv[(i + off) as usize];
            let left = if a > 1 { prev_ref[b as usize] } else { 0.0 };
            let down = if b > 1 { prev_ref[b as usize - 1] } else { 0.0 };
            y + left.max(down)
        };
        let slice = &mut cur[b_lo as usize..=b_hi as usize];
        if slice.len() >= PAR_MIN_LEN {
            slice
                .par_iter_mut()
                .with_min_len(PAR_MIN_LEN / 2)
                .enumerate()
                .for_each(|(k, out)| *out = cell(b_lo + k as i64));
        } else {
            for (k, out) in slice.iter_mut().enumerate() {
                *out = cell(b_lo + k as i64);
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[rows as usize])
}

/// Wedge last-passage time by anti-diagonal wavefront in corner
/// coordinates. The wedge step `(0,1)` reaches back two diagonals, so three
/// buffers rotate. Gives the same bits as [`wedge_passage`].
pub fn wedge_passage_wavefront(u: i64, v: i64, field: &WeightField) -> Result<f64, LppError> {
    check_wedge(u, v)?;
    field.require(v, u + v - 1)?;
    let width = u + v;
    let inv = field.inverse_rates(1 - v, u + v - 1);
    let off = v - 1;
    let seed = field.seed;
    let len = v as usize + 1;
    let mut prev2 = vec![0.0f64; len];
    let mut prev = vec![0.0f64; len];
    let mut cur = vec![0.0f64; len];
    for d in 2..=(width + v) {
        let b_lo = 1.max(d - width);
        let b_hi = v.min(d - 1);
        let (p1, p2) = (&prev, &prev2);
        let cell = |b: i64| {
            let a = d - b;
            let i = a - b;
            let w = site_exp(seed, i, b) * inv[(i + off) as usize];
            let left = if a > 1 { p1[b as usize] } else { 0.0 };
            let up = if b > 1 { p1[b as usize - 1] } else { 0.0 };
            let diag = if a > 1 && b > 1 { p2[b as usize - 1] } else { 0.0 };
            w + left.max(diag).max(up)
        };
        let slice = &mut cur[b_lo as usize..=b_hi as usize];
        if slice.len() >= PAR_MIN_LEN {
            slice
                .par_iter_mut()
                .with_min_len(PAR_MIN_LEN / 2)
                .enumerate()
                .for_each(|(k, out)| *out = cell(b_lo + k as i64));
        } else {
            for (k, out) in slice.iter_mut().enumerate() {
                *out = cell(b_lo + k as i64);
            }
        }
        std::mem::swap(&mut prev2, &mut prev);
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[v as usize])
}

/// Checks `T(x, y) == G(x + y, y)` bit-for-bit, evaluating the wedge time on
/// `wedge` and the corner time on `corner`. With a single shared field the
/// identity holds deterministically; independent fields serve as a control.
pub fn transfer_identity_check(
    x: i64,
    y: i64,
    wedge: &WeightField,
    corner: &WeightField,
) -> Result<bool, LppError> {
    let t = wedge_passage(x, y, wedge)?;
    let g = corner_growth(x + y, y, corner)?;
    Ok(t == g)
}

/// Monte Carlo estimate of `T^{n, floor(nq)}(floor(nx), floor(ny)) / n`
/// over `reps` independent fields seeded from `seed`.
pub fn scaled_limit_estimate(
    x: f64,
    y: f64,
    n: u64,
    reps: usize,
    speed: &SpeedFunction,
    q: f64,
    seed: u64,
) -> Result<Estimate, LppError> {
    let samples = scaled_limit_samples(x, y, n, reps, speed, q, seed, None)?;
    Ok(Estimate::from_samples(&samples))
}

/// Per-replica values of `T / n`, optionally restricted to the column range
/// `constrain = (x0, x1)` given in macroscopic units.
#[allow(clippy::too_many_arguments)]
pub fn scaled_limit_samples(
    x: f64,
    y: f64,
    n: u64,
    reps: usize,
    speed: &SpeedFunction,
    q: f64,
    seed: u64,
    constrain: Option<(f64, f64)>,
) -> Result<Vec<f64>, LppError> {
    if reps == 0 {
        return Err(LppError::Argument("reps must be at least 1".into()));
    }
    let nf = n as f64;
    let u = (nf * x).floor() as i64;
    let v = (nf * y).floor() as i64;
    let shift = (nf * q).floor() as i64;
    let base = WeightField::for_wedge(speed.clone(), n, shift, seed, u, v)?;
    (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let field = base.with_seed(derive_seed(seed, rep));
            let t = match constrain {
                None => wedge_passage(u, v, &field)?,
                Some((x0, x1)) => wedge_passage_constrained(
                    u,
                    v,
                    &field,
                    (nf * x0).floor() as i64,
                    (nf * x1).floor() as i64,
                )?,
            };
            Ok(t / nf)
        })
        .collect()
}

/// Per-replica values of `G(floor(nx), floor(ny)) / n` with
/// `Y(a, b) ~ Exp(c((a - b) / n))`.
pub fn corner_limit_samples(
    x: f64,
    y: f64,
    n: u64,
    reps: usize,
    speed: &SpeedFunction,
    seed: u64,
) -> Result<Vec<f64>, LppError> {
    if reps == 0 {
        return Err(LppError::Argument("reps must be at least 1".into()));
    }
    let nf = n as f64;
    let m = (nf * x).floor() as i64;
    let rows = (nf * y).floor() as i64;
    let base = WeightField::for_corner(speed.clone(), n, 0, seed, m, rows)?;
    (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let field = base.with_seed(derive_seed(seed, rep));
            Ok(corner_growth(m, rows, &field)? / nf)
        })
        .collect()
}
