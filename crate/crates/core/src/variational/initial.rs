use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileParseError {
    #[error("expected {expected} values for {breakpoints} breakpoints, got {got}")]
    ValueCount {
        breakpoints: usize,
        expected: usize,
        got: usize,
    },
    #[error("density #{index} = {value} is outside [0, 1]")]
    Range { index: usize, value: f64 },
    #[error("breakpoints must be finite and strictly increasing (violated at #{index})")]
    Breakpoints { index: usize },
    #[error("cannot parse initial profile `{0}`: expected `const:<rho>` or JSON")]
    Syntax(String),
    #[error("invalid initial profile JSON: {0}")]
    Json(String),
}

/// Piecewise-constant initial density `rho_0` with values in `[0, 1]`.
///
/// `values[k]` holds between `breakpoints[k-1]` and `breakpoints[k]`. The
/// antiderivative `v0` is normalized by `v0(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub struct InitialProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    /// `v0` at each breakpoint.
    anchors: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    #[serde(default)]
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl TryFrom<ProfileSpec> for InitialProfile {
    type Error = ProfileParseError;

    fn try_from(spec: ProfileSpec) -> Result<Self, Self::Error> {
        InitialProfile::new(spec.breakpoints, spec.values)
    }
}

impl From<InitialProfile> for ProfileSpec {
    fn from(p: InitialProfile) -> Self {
        ProfileSpec {
            breakpoints: p.breakpoints,
            values: p.values,
        }
    }
}

impl InitialProfile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, ProfileParseError> {
        if values.len() != breakpoints.len() + 1 {
            return Err(ProfileParseError::ValueCount {
                breakpoints: breakpoints.len(),
                expected: breakpoints.len() + 1,
                got: values.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(ProfileParseError::Range { index, value });
            }
        }
        for (index, &a) in breakpoints.iter().enumerate() {
            if !a.is_finite() || (index > 0 && a <= breakpoints[index - 1]) {
                return Err(ProfileParseError::Breakpoints { index });
            }
        }
        // Integrate from 0 outwards to each breakpoint.
        let start = breakpoints.partition_point(|&a| a < 0.0);
        let mut anchors = vec![0.0; breakpoints.len()];
        let mut pos = 0.0;
        let mut acc = 0.0;
        for k in start..breakpoints.len() {
            acc += values[k] * (breakpoints[k] - pos);
            pos = breakpoints[k];
            anchors[k] = acc;
        }
        let (mut pos, mut acc) = (0.0, 0.0);
        for k in (0..start).rev() {
            acc -= values[k + 1] * (pos - breakpoints[k]);
            pos = breakpoints[k];
            anchors[k] = acc;
        }
        Ok(InitialProfile {
            breakpoints,
            values,
            anchors,
        })
    }

    pub fn constant(rho: f64) -> Result<Self, ProfileParseError> {
        Self::new(Vec::new(), vec![rho])
    }

    /// Parses `const:<rho>` or the JSON object `{"breakpoints": [...], "values": [...]}`.
    pub fn parse(text: &str) -> Result<Self, ProfileParseError> {
        let text = text.trim();
        if let Some(rest) = text.strip_prefix("const:") {
            let rho: f64 = rest
                .trim()
                .parse()
                .map_err(|_| ProfileParseError::Syntax(text.to_string()))?;
            return Self::constant(rho);
        }
        if text.starts_with('{') {
            return serde_json::from_str(text).map_err(|e| ProfileParseError::Json(e.to_string()));
        }
        Err(ProfileParseError::Syntax(text.to_string()))
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Constant value, if the profile has no breakpoints.
    pub fn as_constant(&self) -> Option<f64> {
        self.breakpoints.is_empty().then(|| self.values[0])
    }

    /// Density at `x`; at a breakpoint the value to the right.
    pub fn density(&self, x: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|&a| a <= x)]
    }

    /// Antiderivative with `v0(0) = 0`.
    pub fn v0(&self, x: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&a| a <= x);
        if k == 0 {
            match self.breakpoints.first() {
                Some(&a) if a <= 0.0 => self.anchors[0] + self.values[0] * (x - a),
                _ => self.values[0] * x,
            }
        } else {
            self.anchors[k - 1] + self.values[k] * (x - self.breakpoints[k - 1])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile() {
        let p = InitialProfile::parse("const:0.3").unwrap();
        assert_eq!(p.as_constant(), Some(0.3));
        assert_eq!(p.v0(2.0), 0.6);
        assert_eq!(p.v0(-1.0), -0.3);
        assert!(InitialProfile::parse("const:1.5").is_err());
        assert!(InitialProfile::parse("banana").is_err());
    }

    #[test]
    fn step_profile_antiderivative() {
        let p = InitialProfile::parse(r#"{"breakpoints":[-1.0,2.0],"values":[0.2,0.6,1.0]}"#)
            .unwrap();
        assert_eq!(p.v0(0.0), 0.0);
        assert!((p.v0(1.0) - 0.6).abs() < 1e-15);
        assert!((p.v0(3.0) - (1.2 + 1.0)).abs() < 1e-15);
        assert!((p.v0(-1.0) + 0.6).abs() < 1e-15);
        assert!((p.v0(-2.0) + 0.8).abs() < 1e-15);
        assert_eq!(p.density(-1.0), 0.6);
        assert_eq!(p.density(-1.5), 0.2);
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        let p = InitialProfile::new(vec![-2.0, -0.5, 0.0, 1.5], vec![0.1, 0.9, 0.4, 0.7, 0.3])
            .unwrap();
        for k in -40..=40 {
            let x = k as f64 * 0.1;
            let m = 20_000;
            let h = x / m as f64;
            let quad: f64 = (0..m).map(|j| p.density((j as f64 + 0.5) * h)).sum::<f64>() * h;
            assert!((p.v0(x) - quad).abs() < 1e-3, "x = {x}");
        }
    }

    #[test]
    fn all_positive_breakpoints() {
        let p = InitialProfile::new(vec![1.0, 2.0], vec![0.5, 0.0, 1.0]).unwrap();
        assert_eq!(p.v0(-1.0), -0.5);
        assert_eq!(p.v0(1.5), 0.5);
        assert_eq!(p.v0(3.0), 1.5);
    }
}
