//! Black-box predictors and feature masking.
//!
//! Everything downstream only sees a [`Predictor`]: a deterministic map from
//! a batch of feature vectors to class-probability rows. Two desk-scale
//! learners are built in; any other model can be attached through the
//! line-delimited JSON [`adapter`] protocol.

pub mod adapter;
mod dataset;
pub mod logistic;
mod mask;
pub mod mlp;
pub mod synthetic;

use serde::{Deserialize, Serialize};

pub use adapter::AdapterModel;
pub use dataset::{Dataset, Instance};
pub use logistic::{train_logistic, LogisticModel};
pub use mask::{mask_instance, mask_values, BaselineSpec};
pub use mlp::{train_mlp, MlpModel};
pub use synthetic::{planted_redundancy, PlantedSpec};

use crate::error::{Error, Result};

/// Class-probability rows, one per input row.
pub type ProbRows = Vec<Vec<f64>>;

/// A black-box classifier.
///
/// Implementations must be deterministic and return rows that are
/// probability distributions over `classes()`.
pub trait Predictor: Send + Sync {
    fn dims(&self) -> usize;

    fn classes(&self) -> usize;

    fn predict(&self, batch: &[Vec<f64>]) -> Result<ProbRows>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn dims(&self) -> usize {
        (**self).dims()
    }
    fn classes(&self) -> usize {
        (**self).classes()
    }
    fn predict(&self, batch: &[Vec<f64>]) -> Result<ProbRows> {
        (**self).predict(batch)
    }
}

impl<P: Predictor + ?Sized> Predictor for Box<P> {
    fn dims(&self) -> usize {
        (**self).dims()
    }
    fn classes(&self) -> usize {
        (**self).classes()
    }
    fn predict(&self, batch: &[Vec<f64>]) -> Result<ProbRows> {
        (**self).predict(batch)
    }
}

/// Predicts a batch of instances after checking their dimension.
pub fn predict_batch<P: Predictor + ?Sized>(p: &P, batch: &[Instance]) -> Result<ProbRows> {
    let rows: Vec<Vec<f64>> = batch.iter().map(|i| i.values.clone()).collect();
    check_rows(p.dims(), &rows)?;
    p.predict(&rows)
}

pub(crate) fn check_rows(d: usize, rows: &[Vec<f64>]) -> Result<()> {
    match rows.iter().find(|r| r.len() != d) {
        Some(r) => Err(Error::DimensionMismatch { expected: d, found: r.len() }),
        None => Ok(()),
    }
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn softmax_in_place(logits: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for z in logits.iter_mut() {
        *z = (*z - max).exp();
        sum += *z;
    }
    logits.iter_mut().for_each(|z| *z /= sum);
}

/// `ln(sum(exp(z)))` without overflow.
pub(crate) fn log_sum_exp(z: &[f64]) -> f64 {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Hyper-parameters shared by the built-in learners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    /// Hidden width, MLP only.
    pub hidden: usize,
    /// Mini-batch size, MLP only.
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 200, lr: 0.1, seed: 0, hidden: 16, batch_size: 32 }
    }
}

impl TrainConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs must be at least 1"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::config(format!("learning rate must be positive, got {}", self.lr)));
        }
        Ok(())
    }
}

/// A serializable built-in model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BuiltinModel {
    Logistic(LogisticModel),
    Mlp(MlpModel),
}

impl Predictor for BuiltinModel {
    fn dims(&self) -> usize {
        match self {
            BuiltinModel::Logistic(m) => m.dims(),
            BuiltinModel::Mlp(m) => m.dims(),
        }
    }

    fn classes(&self) -> usize {
        match self {
            BuiltinModel::Logistic(m) => m.classes(),
            BuiltinModel::Mlp(m) => m.classes(),
        }
    }

    fn predict(&self, batch: &[Vec<f64>]) -> Result<ProbRows> {
        match self {
            BuiltinModel::Logistic(m) => m.predict(batch),
            BuiltinModel::Mlp(m) => m.predict(batch),
        }
    }
}

impl BuiltinModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Fraction of instances whose argmax prediction matches their label.
pub fn accuracy<P: Predictor + ?Sized>(p: &P, ds: &Dataset) -> Result<f64> {
    if !ds.is_labelled() {
        return Err(Error::UnlabeledDataset);
    }
    let probs = predict_batch(p, ds.instances())?;
    let hits = probs.iter().zip(ds.instances()).filter(|(row, inst)| Some(argmax(row)) == inst.label).count();
    Ok(hits as f64 / ds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_rows_are_distributions() {
        let mut z = vec![1000.0, 999.0, -1000.0];
        softmax_in_place(&mut z);
        assert!((z.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(z.iter().all(|p| (0.0..=1.0).contains(p)));
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn argmax_prefers_lower_index_on_ties() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.3, 0.3]), 1);
    }
}
