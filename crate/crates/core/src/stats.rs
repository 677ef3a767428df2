use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    /// Mean and standard error (unbiased variance) of `xs`. A single
    /// sample has infinite standard error; an empty slice yields NaN.
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let k = xs.len();
        if k == 0 {
            return Estimate {
                mean: f64::NAN,
                stderr: f64::NAN,
                samples: 0,
            };
        }
        let mean = xs.iter().sum::<f64>() / k as f64;
        let stderr = if k < 2 {
            f64::INFINITY
        } else {
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        };
        Estimate {
            mean,
            stderr,
            samples: k,
        }
    }
}
