//! TASEP and the wedge interfaces `xi^k` driven by one set of clocks, and
//! the pathwise envelope identity
//! `z_i(t) = sup_k { z_k(0) - xi^k_{i-k}(t) }`.

use serde::{Deserialize, Serialize};

use super::clock::{Ring, RingStream};
use super::xi::XiProcess;
use super::{SimConfig, SimError};
use crate::rng::derive_seed;
use crate::speed::SpeedFunction;

/// TASEP on the sites `i_lo..=i_hi`, replaying externally supplied rings.
/// Sites outside are empty and stay empty as long as no particle sits on
/// `i_hi` (see [`CoupledTasep::at_edge`]).
#[derive(Debug, Clone)]
pub struct CoupledTasep {
    i_lo: i64,
    eta: Vec<u8>,
    current: Vec<u64>,
    z0: Vec<i64>,
    rates: Vec<f64>,
    lambda: f64,
}

impl CoupledTasep {
    /// `z_{i_lo - 1}(0) = z_before`; heights increase by `eta_i` at site `i`.
    pub fn new(speed: &SpeedFunction, n: u64, i_lo: i64, eta: Vec<u8>, z_before: i64, lambda: f64) -> Self {
        let nf = n as f64;
        let rates: Vec<f64> = (0..eta.len()).map(|k| speed.eval((i_lo + k as i64) as f64 / nf)).collect();
        assert!(rates.iter().all(|&r| r <= lambda), "lambda below the largest rate");
        let z0 = eta
            .iter()
            .scan(z_before, |z, &e| {
                *z += i64::from(e);
                Some(*z)
            })
            .collect();
        CoupledTasep {
            i_lo,
            current: vec![0; eta.len()],
            eta,
            z0,
            rates,
            lambda,
        }
    }

    pub fn i_hi(&self) -> i64 {
        self.i_lo + self.eta.len() as i64 - 1
    }

    /// Applies a ring; returns whether a particle jumped.
    pub fn apply(&mut self, ring: &Ring) -> bool {
        let k = ring.site - self.i_lo;
        if k < 0 || k + 1 >= self.eta.len() as i64 {
            return false;
        }
        let k = k as usize;
        if self.eta[k] == 1 && self.eta[k + 1] == 0 && ring.fires(self.rates[k], self.lambda) {
            self.eta[k] = 0;
            self.eta[k + 1] = 1;
            self.current[k] += 1;
            true
        } else {
            false
        }
    }

    /// A particle on the last site, which cannot leave the array.
    pub fn at_edge(&self) -> bool {
        self.eta.last() == Some(&1)
    }

    pub fn occupation(&self, i: i64) -> u8 {
        let k = i - self.i_lo;
        if k < 0 || k >= self.eta.len() as i64 {
            0
        } else {
            self.eta[k as usize]
        }
    }

    /// `J_i(t)`; zero outside the array.
    pub fn current(&self, i: i64) -> u64 {
        let k = i - self.i_lo;
        if k < 0 || k >= self.eta.len() as i64 {
            0
        } else {
            self.current[k as usize]
        }
    }

    /// `z_i(t) = z_i(0) - J_i(t)`, for `i <= i_hi`.
    pub fn height(&self, i: i64) -> i64 {
        let k = i - self.i_lo;
        if k < 0 {
            self.z0[0] - i64::from(self.eta[0])
        } else {
            self.z0[k as usize] - self.current[k as usize] as i64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeOptions {
    /// Sites `i` at which the identity is checked; default `config.observe`.
    pub sites: Option<(i64, i64)>,
    /// Starting points `k` kept explicitly; default from the window and the
    /// particle count so that the tail bounds close.
    pub k_range: Option<(i64, i64)>,
    /// Stop after this many particle jumps.
    pub max_events: u64,
    /// Drive the interfaces by an independent stream with this seed.
    /// The identity should then fail; used as a negative control.
    pub decoupled_seed: Option<u64>,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        EnvelopeOptions {
            sites: None,
            k_range: None,
            max_events: 1000,
            decoupled_seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeViolation {
    /// Clock time.
    pub time: f64,
    pub site: i64,
    pub height: i64,
    pub envelope: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    /// Site comparisons made.
    pub checks: u64,
    pub events: u64,
    pub violation_count: u64,
    /// The first few violations.
    pub violations: Vec<EnvelopeViolation>,
    /// Why the run could not certify the identity, if it could not.
    pub inconclusive: Option<String>,
}

impl EnvelopeReport {
    pub fn passes(&self) -> bool {
        self.checks > 0 && self.violation_count == 0 && self.inconclusive.is_none()
    }
}

const KEPT_VIOLATIONS: usize = 16;

/// Runs TASEP from the particles of `config.initial` inside `config.window`
/// (empty elsewhere, `z_0(0) = 0`) together with the interfaces `xi^k`, all
/// on the clocks of `config.seed`, until clock time `n t_end` or
/// `max_events` jumps, and compares `z_i(t)` with the supremum over `k`
/// after every event. Starting points left of `k_range` contribute exactly
/// `z_L`, the height left of every particle; those right of it are bounded
/// by `z_L + N - (k_hi + 1 - i)`.
///
/// A term with `xi^k_{i-k} > z_k(0) - z_L` cannot attain the supremum, so
/// each interface only needs to be exact up to height `N + 1`; by the
/// light-cone property that holds on a finite range of `j`.
pub fn envelope_check(config: &SimConfig, opts: &EnvelopeOptions) -> Result<EnvelopeReport, SimError> {
    let (w_lo, w_hi) = config.window;
    let eta0: Vec<u8> = (w_lo..=w_hi)
        .map(|i| config.initial.occupation(i, config.n, config.seed))
        .collect();
    let particles: i64 = eta0.iter().map(|&e| i64::from(e)).sum();
    // z_0(0) = 0 with every site outside the window empty.
    let z_before = if w_lo > 0 {
        0
    } else {
        -eta0[..=((-w_lo) as usize).min(eta0.len() - 1)]
            .iter()
            .map(|&e| i64::from(e))
            .sum::<i64>()
    };
    let (s_lo, s_hi) = opts.sites.unwrap_or(config.observe);
    let (k_lo, k_hi) = opts.k_range.unwrap_or((w_lo, s_hi.max(w_hi) + particles + 1));
    if s_lo > s_hi || k_lo > k_hi || k_lo > w_lo {
        return Err(SimError::Config(format!(
            "need sites {s_lo}..={s_hi} nonempty and k range {k_lo}..={k_hi} starting at or left of {w_lo}"
        )));
    }
    // Each jump moves one particle one site, so none can pass t_hi.
    let t_hi = w_hi.max(s_hi) + opts.max_events as i64 + 1;
    let mut eta = eta0;
    eta.resize((t_hi - w_lo + 1) as usize, 0);

    let cap = particles + 1;
    let (j_lo, j_hi) = (-cap - 1, (s_hi - k_lo).max(0) + cap + 1);
    let g_lo = (j_lo + k_lo).min(w_lo);
    let g_hi = (j_hi + k_hi).max(t_hi);
    let nf = config.n as f64;
    let lambda = config.speed.max_rate_on((g_lo - 1) as f64 / nf, (g_hi + 1) as f64 / nf);

    let mut tasep = CoupledTasep::new(&config.speed, config.n, w_lo, eta, z_before, lambda);
    let z_left = tasep.height(w_lo - 1);
    let z0: Vec<i64> = (k_lo..=k_hi).map(|k| tasep.height(k.min(t_hi))).collect();
    let mut xis: Vec<XiProcess> = (k_lo..=k_hi).map(|k| XiProcess::new(k, j_lo, j_hi)).collect();
    let rates: Vec<f64> = (g_lo..=g_hi).map(|s| config.speed.eval(s as f64 / nf)).collect();
    let xi_fires = |r: &Ring| r.fires(rates[(r.site - g_lo) as usize], lambda);

    let mut main = RingStream::new(config.seed, lambda, g_lo, g_hi);
    let mut other = opts
        .decoupled_seed
        .map(|s| RingStream::new(derive_seed(s, 0xdec), lambda, g_lo, g_hi));

    let horizon = nf * config.t_end;
    let mut report = EnvelopeReport {
        checks: 0,
        events: 0,
        violation_count: 0,
        violations: Vec::new(),
        inconclusive: None,
    };
    while report.events < opts.max_events {
        // Next ring, and whether it drives the particles, the interfaces or both.
        let (ring, drives_z, drives_xi) = match &mut other {
            None => (main.next_ring(), true, true),
            Some(o) if o.peek_time() < main.peek_time() => (o.next_ring(), false, true),
            Some(_) => (main.next_ring(), true, false),
        };
        if ring.time > horizon {
            break;
        }
        let mut changed = false;
        if drives_z && tasep.apply(&ring) {
            report.events += 1;
            changed = true;
        }
        if drives_xi && xi_fires(&ring) {
            for xi in &mut xis {
                if let Some(j) = xi.apply(ring.site) {
                    changed |= (s_lo - xi.k..=s_hi - xi.k).contains(&j) && xi.get(j) <= cap;
                }
            }
        }
        if !changed {
            continue;
        }
        for i in s_lo..=s_hi {
            let envelope = xis
                .iter()
                .zip(&z0)
                .map(|(xi, &z)| z - xi.get(i - xi.k).min(cap))
                .fold(z_left, i64::max);
            let z = tasep.height(i);
            let tail = z_left + particles - (k_hi + 1 - i);
            if tail > envelope {
                report.inconclusive = Some(format!("tail bound {tail} above the kept supremum at site {i}"));
                return Ok(report);
            }
            report.checks += 1;
            if envelope != z {
                report.violation_count += 1;
                if report.violations.len() < KEPT_VIOLATIONS {
                    report.violations.push(EnvelopeViolation {
                        time: ring.time,
                        site: i,
                        height: z,
                        envelope,
                    });
                }
            }
        }
    }
    Ok(report)
}
