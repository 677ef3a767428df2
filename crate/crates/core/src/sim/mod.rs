//! Inhomogeneous TASEP: particles at site `i` jump to `i + 1` at rate
//! `c(i / n)` when the target is empty.
//!
//! [`run`] is the production engine on a finite window. [`clock`] provides
//! shared per-site Poisson clocks for the coupled constructions used by
//! [`run_xi`], [`envelope_check`] and the rate-monotonicity check.

pub mod clock;
mod coupled;
mod engine;
mod snapshot;
mod xi;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{hash3, unit_open0};
use crate::speed::SpeedFunction;
use crate::variational::InitialProfile;

pub use coupled::{
    envelope_check, CoupledTasep, EnvelopeOptions, EnvelopeReport, EnvelopeViolation,
};
pub use engine::{run, run_replicas, Snapshot};
pub use snapshot::{OccupationSnapshot, SnapshotFormatError};
pub use xi::{run_xi, xi_recursion_check, XiProcess, XiRun};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(
        "window overflow at time {time}: boundary influence reached site {site}, inside the \
         observed sites {observe_lo}..={observe_hi}; enlarge the window"
    )]
    WindowOverflow {
        time: f64,
        site: i64,
        observe_lo: i64,
        observe_hi: i64,
    },
    #[error("sites {lo}..={hi} are outside the window {i_min}..={i_max}")]
    OutOfWindow { lo: i64, hi: i64, i_min: i64, i_max: i64 },
    #[error("horizon {horizon} exceeded after {events} events; partial state: {partial}")]
    Horizon {
        horizon: f64,
        events: u64,
        partial: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// How the initial occupations are drawn from `rho_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "profile", rename_all = "snake_case")]
pub enum InitialCondition {
    /// Independent sites, `P(eta_i = 1) = rho_0(i / n)`.
    Bernoulli(InitialProfile),
    /// `eta_i = 1` iff `floor(n v0((i + 1) / n)) > floor(n v0(i / n))`.
    Deterministic(InitialProfile),
    /// Explicit occupations starting at `first`; every other site is empty.
    Sites { first: i64, eta: Vec<u8> },
}

const INIT_TAG: i64 = 0x1a17;

impl InitialCondition {
    /// Occupation of site `i`; Bernoulli draws depend only on `(seed, i)`.
    pub fn occupation(&self, i: i64, n: u64, seed: u64) -> u8 {
        let nf = n as f64;
        match self {
            InitialCondition::Bernoulli(p) => {
                let u = unit_open0(hash3(seed, i, INIT_TAG));
                u8::from(u <= p.density(i as f64 / nf))
            }
            InitialCondition::Deterministic(p) => {
                let lo = (nf * p.v0(i as f64 / nf)).floor();
                let hi = (nf * p.v0((i + 1) as f64 / nf)).floor();
                u8::from(hi > lo)
            }
            InitialCondition::Sites { first, eta } => {
                let k = i - first;
                if k >= 0 && (k as usize) < eta.len() {
                    u8::from(eta[k as usize] != 0)
                } else {
                    0
                }
            }
        }
    }
}

/// One simulation: sites `window.0..=window.1`, run to macroscopic time
/// `t_end` (clock time `n t_end`). Boundary influence must not reach the
/// sites `observe.0..=observe.1` before `t_end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: u64,
    pub window: (i64, i64),
    pub observe: (i64, i64),
    pub speed: SpeedFunction,
    pub t_end: f64,
    pub seed: u64,
    pub initial: InitialCondition,
}

impl SimConfig {
    /// Window covering the macroscopic interval `[a, b]`, padded on each
    /// side by `c t + 6 sqrt(c t n) / n`, where `c` is the largest rate the
    /// boundary influence can meet on its way in from that side (at most
    /// `c_max`).
    pub fn new(
        n: u64,
        speed: SpeedFunction,
        t_end: f64,
        seed: u64,
        initial: InitialCondition,
        (a, b): (f64, f64),
    ) -> Result<Self, SimError> {
        if n == 0 {
            return Err(SimError::Config("n must be positive".into()));
        }
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(SimError::Config(format!("t_end must be finite and nonnegative, got {t_end}")));
        }
        if !(a < b) {
            return Err(SimError::Config(format!("observation interval [{a}, {b}] is empty")));
        }
        let nf = n as f64;
        let far = speed.max_rate() * t_end + 1.0;
        let margin = |rate: f64| {
            let reach = rate * t_end;
            let pad = reach + 6.0 * (reach * nf).sqrt() / nf;
            (pad * nf).ceil() as i64 + 2
        };
        let observe = ((nf * a).floor() as i64, (nf * b).floor() as i64 + 1);
        Ok(SimConfig {
            n,
            window: (
                observe.0 - margin(speed.max_rate_on(a - far, a)),
                observe.1 + margin(speed.max_rate_on(b, b + far)),
            ),
            observe,
            speed,
            t_end,
            seed,
            initial,
        })
    }

    pub fn with_window(mut self, i_min: i64, i_max: i64) -> Result<Self, SimError> {
        if i_min > self.observe.0 || i_max < self.observe.1 || i_min >= i_max {
            return Err(SimError::OutOfWindow {
                lo: self.observe.0,
                hi: self.observe.1,
                i_min,
                i_max,
            });
        }
        self.window = (i_min, i_max);
        Ok(self)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SimConfig {
            seed,
            ..self.clone()
        }
    }

    pub fn sites(&self) -> usize {
        (self.window.1 - self.window.0 + 1) as usize
    }

    /// `z_i(0)` with `z_0(0) = 0` and `z_{i+1} - z_i = eta_{i+1}`.
    pub fn initial_height(&self, i: i64) -> i64 {
        let occ = |m: i64| self.initial.occupation(m, self.n, self.seed) as i64;
        if i >= 0 {
            (1..=i).map(occ).sum()
        } else {
            -((i + 1)..=0).map(occ).sum::<i64>()
        }
    }
}
