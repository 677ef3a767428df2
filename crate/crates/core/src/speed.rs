//! Lower semicontinuous step speed functions.
//!
//! A [`SpeedFunction`] is a positive step function on the real line with
//! finitely many breakpoints. On open intervals it takes the interval rate;
//! at a breakpoint it takes the smaller of the two adjacent rates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpeedError {
    #[error("expected {expected} rates for {breakpoints} breakpoints, got {got}")]
    RateCount {
        breakpoints: usize,
        expected: usize,
        got: usize,
    },
    #[error("rate #{index} = {value} is not a finite positive number")]
    NonPositiveRate { index: usize, value: f64 },
    #[error("breakpoints must be finite and strictly increasing (violated at #{index})")]
    Breakpoints { index: usize },
    #[error("sandwich tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("two-phase rates must be finite and positive (c1 = {c1}, c2 = {c2})")]
    TwoPhase { c1: f64, c2: f64 },
}

/// Where a point falls relative to the breakpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// Strictly inside interval `k` (interval `k` lies between breakpoints `k-1` and `k`).
    Interval(usize),
    /// Exactly on breakpoint `k`.
    Breakpoint(usize),
}

/// Positive lower semicontinuous step function.
///
/// `rates[k]` is the value on the open interval between `breakpoints[k-1]`
/// and `breakpoints[k]` (with the outer intervals unbounded), so there is
/// always exactly one more rate than breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpeedSpec", into = "SpeedSpec")]
pub struct SpeedFunction {
    breakpoints: Vec<f64>,
    rates: Vec<f64>,
}

/// On-disk representation: `{"rates": [...], "breakpoints": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedSpec {
    pub rates: Vec<f64>,
    #[serde(default)]
    pub breakpoints: Vec<f64>,
}

impl TryFrom<SpeedSpec> for SpeedFunction {
    type Error = SpeedError;

    fn try_from(spec: SpeedSpec) -> Result<Self, Self::Error> {
        SpeedFunction::new(spec.breakpoints, spec.rates)
    }
}

impl From<SpeedFunction> for SpeedSpec {
    fn from(f: SpeedFunction) -> Self {
        SpeedSpec {
            rates: f.rates,
            breakpoints: f.breakpoints,
        }
    }
}

impl SpeedFunction {
    /// Builds a step function, merging breakpoints whose two sides carry the
    /// same rate.
    pub fn new(breakpoints: Vec<f64>, rates: Vec<f64>) -> Result<Self, SpeedError> {
        if rates.len() != breakpoints.len() + 1 {
            return Err(SpeedError::RateCount {
                breakpoints: breakpoints.len(),
                expected: breakpoints.len() + 1,
                got: rates.len(),
            });
        }
        for (index, &value) in rates.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(SpeedError::NonPositiveRate { index, value });
            }
        }
        for (index, &a) in breakpoints.iter().enumerate() {
            if !a.is_finite() || (index > 0 && a <= breakpoints[index - 1]) {
                return Err(SpeedError::Breakpoints { index });
            }
        }

        let mut bps = Vec::with_capacity(breakpoints.len());
        let mut rs = Vec::with_capacity(rates.len());
        rs.push(rates[0]);
        for (k, &a) in breakpoints.iter().enumerate() {
            let next = rates[k + 1];
            if next != *rs.last().unwrap() {
                bps.push(a);
                rs.push(next);
            }
        }
        Ok(SpeedFunction {
            breakpoints: bps,
            rates: rs,
        })
    }

    pub fn constant(rate: f64) -> Result<Self, SpeedError> {
        Self::new(Vec::new(), vec![rate])
    }

    /// `c1` on `(-inf, 0)`, `c2` on `(0, inf)`, `min(c1, c2)` at the origin.
    pub fn two_phase(c1: f64, c2: f64) -> Result<Self, SpeedError> {
        Ok(TwoPhaseSpeed::new(c1, c2)?.to_speed())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn is_constant(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn locate(&self, x: f64) -> Location {
        let k = self.breakpoints.partition_point(|&a| a < x);
        if k < self.breakpoints.len() && self.breakpoints[k] == x {
            Location::Breakpoint(k)
        } else {
            Location::Interval(k)
        }
    }

    /// Rate on the open interval `k`.
    pub fn interval_rate(&self, k: usize) -> f64 {
        self.rates[k]
    }

    /// Value at breakpoint `k`: the minimum of the two adjacent rates.
    pub fn breakpoint_rate(&self, k: usize) -> f64 {
        self.rates[k].min(self.rates[k + 1])
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.locate(x) {
            Location::Interval(k) => self.rates[k],
            Location::Breakpoint(k) => self.breakpoint_rate(k),
        }
    }

    pub fn max_rate(&self) -> f64 {
        self.rates.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min_rate(&self) -> f64 {
        self.rates.iter().copied().fold(f64::MAX, f64::min)
    }

    /// Largest value taken on the closed interval `[lo, hi]`.
    pub fn max_rate_on(&self, lo: f64, hi: f64) -> f64 {
        let (first, last) = self.interval_span(lo, hi);
        self.rates[first..=last]
            .iter()
            .copied()
            .fold(f64::MIN, f64::max)
    }

    /// Smallest value taken on the closed interval `[lo, hi]`.
    pub fn min_rate_on(&self, lo: f64, hi: f64) -> f64 {
        let (first, last) = self.interval_span(lo, hi);
        self.rates[first..=last]
            .iter()
            .copied()
            .fold(f64::MAX, f64::min)
    }

    fn interval_span(&self, lo: f64, hi: f64) -> (usize, usize) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let first = match self.locate(lo) {
            Location::Interval(k) => k,
            Location::Breakpoint(k) => k,
        };
        let last = match self.locate(hi) {
            Location::Interval(k) => k,
            Location::Breakpoint(k) => k + 1,
        };
        (first, last.max(first))
    }

    /// Lower and upper lsc step functions within `eps` in sup norm.
    ///
    /// Step inputs bracket themselves, so both returned functions equal
    /// `self`. Non-step speed functions are not representable.
    pub fn sandwich(&self, eps: f64) -> Result<(SpeedFunction, SpeedFunction), SpeedError> {
        if !(eps > 0.0) {
            return Err(SpeedError::Tolerance(eps));
        }
        Ok((self.clone(), self.clone()))
    }
}

/// Speed `c1` left of the origin and `c2` from the origin on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseSpeed {
    pub c1: f64,
    pub c2: f64,
}

impl TwoPhaseSpeed {
    pub fn new(c1: f64, c2: f64) -> Result<Self, SpeedError> {
        if !(c1.is_finite() && c2.is_finite() && c1 > 0.0 && c2 > 0.0) {
            return Err(SpeedError::TwoPhase { c1, c2 });
        }
        Ok(TwoPhaseSpeed { c1, c2 })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.c1
        } else if x > 0.0 {
            self.c2
        } else {
            self.c1.min(self.c2)
        }
    }

    pub fn to_speed(&self) -> SpeedFunction {
        SpeedFunction::new(vec![0.0], vec![self.c1, self.c2])
            .expect("validated two-phase rates")
    }
}
