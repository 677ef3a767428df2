//! Shared per-site Poisson clocks.
//!
//! Every site rings at the uniform rate `lambda`; ring `m` of site `s` has
//! an exponential gap and a mark `u`, both pure functions of
//! `(seed, s, m)`. The ring counts as an event of the clock `D_s` for speed
//! `c` when `u lambda < c(s / n)`. Any number of processes replaying the
//! same stream are driven by the same clocks, and raising the speed only
//! adds events.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::rng::{hash3, unit_open0};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ring {
    /// Clock time.
    pub time: f64,
    pub site: i64,
    /// Mark, uniform on `(0, 1]`.
    pub mark: f64,
}

impl Ring {
    /// Whether this ring is an event for a site whose rate is `rate`.
    #[inline]
    pub fn fires(&self, rate: f64, lambda: f64) -> bool {
        self.mark * lambda <= rate
    }
}

#[derive(Clone, Copy)]
struct Pending {
    time: f64,
    site: i64,
    count: i64,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // Reversed so the max-heap yields the earliest ring.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.site.cmp(&self.site))
    }
}

/// Time-ordered rings of the sites `lo..=hi`.
pub struct RingStream {
    seed: u64,
    lambda: f64,
    heap: BinaryHeap<Pending>,
}

impl RingStream {
    pub fn new(seed: u64, lambda: f64, lo: i64, hi: i64) -> Self {
        assert!(lambda > 0.0 && lo <= hi);
        let mut s = RingStream {
            seed,
            lambda,
            heap: BinaryHeap::with_capacity((hi - lo + 1) as usize),
        };
        for site in lo..=hi {
            let time = s.gap(site, 0);
            s.heap.push(Pending { time, site, count: 0 });
        }
        s
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn gap(&self, site: i64, count: i64) -> f64 {
        -unit_open0(hash3(self.seed, site, 2 * count)).ln() / self.lambda
    }

    /// Time of the next ring without consuming it.
    pub fn peek_time(&self) -> f64 {
        self.heap.peek().map_or(f64::INFINITY, |p| p.time)
    }

    pub fn next_ring(&mut self) -> Ring {
        let p = self.heap.pop().expect("stream has at least one site");
        let mark = unit_open0(hash3(self.seed, p.site, 2 * p.count + 1));
        let next = Pending {
            time: p.time + self.gap(p.site, p.count + 1),
            site: p.site,
            count: p.count + 1,
        };
        self.heap.push(next);
        Ring {
            time: p.time,
            site: p.site,
            mark,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rings_are_ordered_and_reproducible() {
        let mut a = RingStream::new(5, 2.0, -3, 3);
        let mut b = RingStream::new(5, 2.0, -3, 3);
        let mut last = 0.0;
        for _ in 0..1000 {
            let r = a.next_ring();
            assert!(r.time >= last);
            last = r.time;
            assert_eq!(r, b.next_ring());
        }
    }

    #[test]
    fn ring_rate_and_thinning() {
        let lambda = 3.0;
        let mut s = RingStream::new(8, lambda, 0, 9);
        let mut fired = 0;
        let total = 200_000;
        let mut end = 0.0;
        for _ in 0..total {
            let r = s.next_ring();
            end = r.time;
            if r.fires(1.0, lambda) {
                fired += 1;
            }
        }
        // 10 sites at rate 3.
        assert!((total as f64 / end - 30.0).abs() < 0.5);
        assert!((fired as f64 / total as f64 - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn streams_agree_on_shared_sites() {
        let mut small = RingStream::new(2, 1.0, 0, 0);
        let mut big = RingStream::new(2, 1.0, -5, 5);
        let from_big: Vec<Ring> = (0..5000).map(|_| big.next_ring()).filter(|r| r.site == 0).collect();
        let from_small: Vec<Ring> = (0..from_big.len()).map(|_| small.next_ring()).collect();
        assert_eq!(from_big, from_small);
    }
}
