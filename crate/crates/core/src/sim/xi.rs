//! Interfaces grown from the wedge `xi_j(0) = max(0, -j)`.
//!
//! `xi_j` increases by one at events of the clock `D_{j + k}` when
//! `xi_j < xi_{j-1}` and `xi_j <= xi_{j+1}`. The first time `xi_i` reaches
//! `j` is the last-passage time `L(i, j)` over the wedge lattice.

use serde::{Deserialize, Serialize};

use super::clock::RingStream;
use super::SimError;
use crate::speed::SpeedFunction;

/// `xi` on the sites `j_lo..=j_hi`; sites outside keep their initial value.
/// They would stay there in the unrestricted process until an end site moves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiProcess {
    pub k: i64,
    pub j_lo: i64,
    heights: Vec<i64>,
    /// Set once an end site has moved; from then on the restriction may differ.
    pub touched_edge: bool,
}

impl XiProcess {
    pub fn new(k: i64, j_lo: i64, j_hi: i64) -> Self {
        assert!(j_lo < j_hi);
        XiProcess {
            k,
            j_lo,
            heights: (j_lo..=j_hi).map(|j| (-j).max(0)).collect(),
            touched_edge: false,
        }
    }

    pub fn j_hi(&self) -> i64 {
        self.j_lo + self.heights.len() as i64 - 1
    }

    pub fn get(&self, j: i64) -> i64 {
        if j < self.j_lo || j > self.j_hi() {
            (-j).max(0)
        } else {
            self.heights[(j - self.j_lo) as usize]
        }
    }

    pub fn can_grow(&self, j: i64) -> bool {
        let x = self.get(j);
        x < self.get(j - 1) && x <= self.get(j + 1)
    }

    /// Applies an event of clock `D_s`; returns the site that grew, if any.
    pub fn apply(&mut self, s: i64) -> Option<i64> {
        let j = s - self.k;
        if j < self.j_lo || j > self.j_hi() || !self.can_grow(j) {
            return None;
        }
        self.heights[(j - self.j_lo) as usize] += 1;
        if j == self.j_lo || j == self.j_hi() {
            self.touched_edge = true;
        }
        Some(j)
    }

    /// `xi_j <= xi_{j-1}` and `xi_j <= xi_{j+1} + 1` on the whole range.
    pub fn inequalities_hold(&self) -> bool {
        (self.j_lo..=self.j_hi()).all(|j| {
            let x = self.get(j);
            x <= self.get(j - 1) && x <= self.get(j + 1) + 1
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiRun {
    /// Clock time at which `xi_i` first reached `j`.
    pub time: f64,
    /// Events that moved the interface.
    pub events: u64,
}

/// Simulates `xi^{k}` with site rates `c((j + k) / n)` until `xi_i >= j`.
/// Only sites `-j..=i + j` can influence this hitting time, so the process
/// is restricted to them (plus one site of margin on each side).
pub fn run_xi(
    k: i64,
    speed: &SpeedFunction,
    n: u64,
    seed: u64,
    (i, j): (i64, i64),
    horizon: f64,
) -> Result<XiRun, SimError> {
    if j <= (-i).max(0) {
        return Ok(XiRun { time: 0.0, events: 0 });
    }
    let nf = n as f64;
    let (j_lo, j_hi) = (-j - 1, i + j + 1);
    let mut xi = XiProcess::new(k, j_lo, j_hi);
    let rates: Vec<f64> = (j_lo..=j_hi).map(|q| speed.eval((q + k) as f64 / nf)).collect();
    let lambda = rates.iter().copied().fold(0.0, f64::max);
    let mut stream = RingStream::new(seed, lambda, j_lo + k, j_hi + k);
    let mut events = 0;
    loop {
        let ring = stream.next_ring();
        if ring.time > horizon {
            return Err(SimError::Horizon {
                horizon,
                events,
                partial: format!("xi_{i} = {} < {j}", xi.get(i)),
            });
        }
        let q = ring.site - k;
        if !ring.fires(rates[(q - j_lo) as usize], lambda) {
            continue;
        }
        if xi.apply(ring.site).is_some() {
            events += 1;
            if xi.get(i) >= j {
                return Ok(XiRun { time: ring.time, events });
            }
        }
    }
}

/// Replays `xi^{k}` on `j_lo..=j_hi` for `events` interface moves and checks
/// pathwise that the time `xi_i` reaches `h` is the first event of
/// `D_{i + k}` after the three predecessors `(i-1, h)`, `(i, h-1)`,
/// `(i+1, h-1)` are reached. Returns `(checked, mismatches)`.
pub fn xi_recursion_check(
    k: i64,
    speed: &SpeedFunction,
    n: u64,
    seed: u64,
    (j_lo, j_hi): (i64, i64),
    events: u64,
) -> (u64, u64) {
    use std::collections::HashMap;
    let nf = n as f64;
    let mut xi = XiProcess::new(k, j_lo, j_hi);
    let rates: Vec<f64> = (j_lo..=j_hi).map(|q| speed.eval((q + k) as f64 / nf)).collect();
    let lambda = rates.iter().copied().fold(0.0, f64::max);
    let mut stream = RingStream::new(seed, lambda, j_lo + k, j_hi + k);
    let mut reached: HashMap<(i64, i64), f64> = HashMap::new();
    let mut fired: Vec<Vec<f64>> = vec![Vec::new(); rates.len()];
    let mut moved = 0;
    while moved < events && !xi.touched_edge {
        let ring = stream.next_ring();
        let q = ring.site - k;
        if !ring.fires(rates[(q - j_lo) as usize], lambda) {
            continue;
        }
        fired[(q - j_lo) as usize].push(ring.time);
        if let Some(site) = xi.apply(ring.site) {
            reached.insert((site, xi.get(site)), ring.time);
            moved += 1;
        }
    }
    let time_of = |i: i64, h: i64| -> Option<f64> {
        if h <= (-i).max(0) {
            Some(0.0)
        } else {
            reached.get(&(i, h)).copied()
        }
    };
    let (mut checked, mut bad) = (0, 0);
    for (&(i, h), &t) in &reached {
        if i <= j_lo || i >= j_hi {
            continue;
        }
        let preds = [time_of(i - 1, h), time_of(i, h - 1), time_of(i + 1, h - 1)];
        let Some(ready) = preds.iter().try_fold(0.0f64, |m, p| p.map(|p| m.max(p))) else {
            bad += 1;
            continue;
        };
        let clock = &fired[(i - j_lo) as usize];
        let next = clock.iter().copied().find(|&s| s > ready);
        checked += 1;
        if next != Some(t) {
            bad += 1;
        }
    }
    (checked, bad)
}
