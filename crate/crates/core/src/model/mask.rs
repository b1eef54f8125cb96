use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Instance};
use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Values substituted for removed features.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "values", rename_all = "kebab-case")]
pub enum BaselineSpec {
    #[default]
    Zero,
    Fixed(Vec<f64>),
    /// Feature means of a dataset, resolved at construction.
    DatasetMean(Vec<f64>),
    /// Removed features are filled from a row sampled from this set.
    ReferenceSet(Vec<Vec<f64>>),
}

impl BaselineSpec {
    pub fn dataset_mean(ds: &Dataset) -> Self {
        BaselineSpec::DatasetMean(ds.feature_means())
    }

    pub fn references(ds: &Dataset) -> Self {
        BaselineSpec::ReferenceSet(ds.instances().iter().map(|i| i.values.clone()).collect())
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            BaselineSpec::Zero => Ok(()),
            BaselineSpec::Fixed(v) | BaselineSpec::DatasetMean(v) => check_len(d, v),
            BaselineSpec::ReferenceSet(rows) => {
                if rows.is_empty() {
                    return Err(Error::config("reference-set baseline is empty"));
                }
                rows.iter().try_for_each(|r| check_len(d, r))
            }
        }
    }

    /// Whether filling a removed feature consumes randomness.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, BaselineSpec::ReferenceSet(_))
    }

    /// One concrete baseline row. Deterministic modes ignore `rng`.
    pub fn draw(&self, d: usize, rng: &mut Rng) -> Result<Vec<f64>> {
        self.validate(d)?;
        Ok(match self {
            BaselineSpec::Zero => vec![0.0; d],
            BaselineSpec::Fixed(v) | BaselineSpec::DatasetMean(v) => v.clone(),
            BaselineSpec::ReferenceSet(rows) => rows[rng.gen_range(0..rows.len())].clone(),
        })
    }

    /// `count` baseline rows; deterministic modes always yield a single row.
    pub fn draw_many(&self, d: usize, count: usize, rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
        if self.is_deterministic() {
            return Ok(vec![self.draw(d, rng)?]);
        }
        (0..count.max(1)).map(|_| self.draw(d, rng)).collect()
    }
}

fn check_len(d: usize, v: &[f64]) -> Result<()> {
    if v.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: v.len() });
    }
    Ok(())
}

/// Features in `keep` from `x`, all others from `baseline`.
pub fn mask_values(x: &[f64], keep: Coalition, baseline: &[f64]) -> Vec<f64> {
    x.iter().zip(baseline).enumerate().map(|(i, (&xi, &bi))| if keep.contains(i) { xi } else { bi }).collect()
}

/// Copy of `x` with every feature outside `keep` replaced by its baseline
/// value. Label and id are carried over.
pub fn mask_instance(x: &Instance, keep: Coalition, baseline: &BaselineSpec, rng: &mut Rng) -> Result<Instance> {
    let d = x.dim();
    if !keep.is_subset_of(Coalition::full(d)) {
        return Err(Error::config(format!("keep set {keep:?} is not a subset of 0..{d}")));
    }
    let base = baseline.draw(d, rng)?;
    Ok(Instance { values: mask_values(&x.values, keep, &base), label: x.label, id: x.id.clone() })
}
