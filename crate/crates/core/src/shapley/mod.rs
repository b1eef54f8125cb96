//! Univariate and bivariate Shapley values.
//!
//! The bivariate explanation of a game `u` is the matrix whose column `j`
//! is the Shapley vector of the presence-filtered game `u_j`. Entry
//! `[i][j]` is the importance of feature `i` restricted to coalitions that
//! already contain `j`:
//!
//! ```text
//! m[i][j] = Σ_{S ⊆ D\{i}, j ∈ S} |S|! (d-|S|-1)! / d! · (u(S ∪ {i}) - u(S))
//! ```
//!
//! Three estimators are provided: exhaustive enumeration ([`exact`]),
//! permutation sampling ([`sampling`]) and a weighted-regression
//! approximation that reuses one solve for every column ([`kernel`]).

pub mod exact;
pub mod kernel;
pub mod sampling;

use serde::{Deserialize, Serialize};

pub use exact::{exact_bivariate, exact_explanation, exact_shapley, MAX_EXACT_PLAYERS};
pub use kernel::{kernel_bivariate, kernel_weight, KernelFit};
pub use sampling::{sampling_bivariate, sampling_bivariate_with, SamplingOptions};

use crate::error::{Error, Result};

/// Default permutations per feature for [`sampling_bivariate`].
pub const DEFAULT_SAMPLING_SAMPLES: usize = 1000;

/// Default coalition draws for [`kernel_bivariate`]: twice the usual
/// `2d + 2048`, since filtering discards part of every sample.
pub fn default_kernel_samples(d: usize) -> usize {
    2 * (2 * d + 2048)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sampling,
    Kernel,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Sampling => "sampling",
            Method::Kernel => "kernel",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "sampling" => Ok(Method::Sampling),
            "kernel" => Ok(Method::Kernel),
            other => Err(Error::config(format!("unknown method {other:?}"))),
        }
    }
}

/// Per-feature Shapley values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub phi: Vec<f64>,
    pub method: Method,
    /// Permutations per feature (sampling) or coalition draws (kernel);
    /// zero for exact.
    pub samples: usize,
    pub seed: Option<u64>,
}

impl Attribution {
    pub fn dim(&self) -> usize {
        self.phi.len()
    }
}

/// The `d x d` bivariate explanation; `values[i][j]` is the importance of
/// `i` given that `j` is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    pub values: Vec<Vec<f64>>,
    pub method: Method,
    pub samples: usize,
    pub seed: Option<u64>,
}

impl InteractionMatrix {
    pub fn new(values: Vec<Vec<f64>>, method: Method) -> Result<Self> {
        let m = InteractionMatrix { values, method, samples: 0, seed: None };
        m.validate()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Column `j`: the Shapley vector of the game filtered on `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    /// Square shape and finite entries.
    pub fn validate(&self) -> Result<()> {
        let d = self.values.len();
        for (i, row) in self.values.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidMatrix(format!("row {i} has {} entries, expected {d}", row.len())));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidMatrix(format!("entry [{i}][{j}] is not finite")));
            }
        }
        Ok(())
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &InteractionMatrix) -> f64 {
        self.values.iter().flatten().zip(other.values.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `|S|! (d-|S|-1)! / d!` for `|S| = 0..d-1`.
pub(crate) fn shapley_weights(d: usize) -> Vec<f64> {
    (0..d)
        .map(|s| {
            // 1 / (d * C(d-1, s))
            let mut binom = 1.0;
            for k in 0..s {
                binom = binom * (d - 1 - k) as f64 / (k + 1) as f64;
            }
            1.0 / (d as f64 * binom)
        })
        .collect()
}
