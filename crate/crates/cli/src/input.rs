//! Parsing of speed functions, initial profiles and grids from arguments.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::{de, Deserialize, Deserializer};
use tasep_core::{InitialProfile, SpeedFunction};

/// `const:<c>`, `two-phase:<c1>,<c2>`, an inline JSON object or a path to a
/// JSON file `{"rates": [...], "breakpoints": [...]}`.
pub fn speed(arg: &str) -> Result<SpeedFunction> {
    let arg = arg.trim();
    if let Some(rest) = arg.strip_prefix("const:") {
        let c: f64 = rest.trim().parse().with_context(|| format!("bad rate in `{arg}`"))?;
        return Ok(SpeedFunction::constant(c)?);
    }
    if let Some(rest) = arg.strip_prefix("two-phase:") {
        let (a, b) = rest
            .split_once(',')
            .with_context(|| format!("expected two-phase:<c1>,<c2>, got `{arg}`"))?;
        let c1: f64 = a.trim().parse().with_context(|| format!("bad c1 in `{arg}`"))?;
        let c2: f64 = b.trim().parse().with_context(|| format!("bad c2 in `{arg}`"))?;
        return Ok(SpeedFunction::two_phase(c1, c2)?);
    }
    if arg.starts_with('{') {
        return serde_json::from_str(arg).with_context(|| "invalid inline speed JSON".to_string());
    }
    let text = read(arg)?;
    serde_json::from_str(&text).with_context(|| format!("invalid speed file {arg}"))
}

/// `const:<rho>`, inline JSON, or a file holding either.
pub fn profile(arg: &str) -> Result<InitialProfile> {
    let trimmed = arg.trim();
    if trimmed.starts_with("const:") || trimmed.starts_with('{') {
        return InitialProfile::parse(trimmed).with_context(|| format!("invalid initial profile `{arg}`"));
    }
    let text = read(trimmed)?;
    InitialProfile::parse(&text).with_context(|| format!("invalid initial profile file {arg}"))
}

fn read(path: &str) -> Result<String> {
    if !Path::new(path).exists() {
        bail!("`{path}` is neither a file nor an inline specification");
    }
    std::fs::read_to_string(path).with_context(|| format!("cannot read {path}"))
}

/// `x0:x1:dx`, the points `x0, x0 + dx, ...` up to `x1` (inclusive within
/// rounding). Used as bin edges for `--bins`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.lo + k as f64 * self.step).collect()
    }

    /// Consecutive pairs of grid points.
    pub fn bins(&self) -> Vec<(f64, f64)> {
        self.points().windows(2).map(|w| (w[0], w[1])).collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts[..] else {
            return Err(format!("expected x0:x1:dx, got `{s}`"));
        };
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number in `{s}`"));
        let g = Grid {
            lo: num(lo)?,
            hi: num(hi)?,
            step: num(step)?,
        };
        if !(g.lo.is_finite() && g.hi.is_finite() && g.lo < g.hi) {
            return Err(format!("need finite x0 < x1 in `{s}`"));
        }
        if !(g.step > 0.0) || g.step > g.hi - g.lo {
            return Err(format!("need 0 < dx <= x1 - x0 in `{s}`"));
        }
        if g.len() > 10_000_000 {
            return Err(format!("`{s}` has too many points"));
        }
        Ok(g)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// `x0,x1`.
pub fn pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected x0,x1, got `{s}`"))?;
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number"));
    Ok((num(a)?, num(b)?))
}
