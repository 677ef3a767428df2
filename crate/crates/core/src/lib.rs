//! TASEP with discontinuous jump rates.
//!
//! Particle simulation, exact last-passage dynamic programming, numerical
//! evaluation of the variational limit formulas, and closed forms for the
//! two-phase speed function.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod lpp;
pub mod rng;
pub mod sim;
pub mod speed;
pub mod stats;
pub mod twophase;
pub mod variational;

pub use lpp::{LppError, WeightField};
pub use sim::{InitialCondition, SimConfig, SimError, Snapshot};
pub use speed::{SpeedError, SpeedFunction, TwoPhaseSpeed};
pub use stats::Estimate;
pub use twophase::{TwoPhaseConstants, TwoPhaseError};
pub use variational::{InitialProfile, VariationalError};
