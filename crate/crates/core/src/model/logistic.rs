//! Multinomial logistic regression trained by full-batch gradient descent.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{check_rows, log_sum_exp, softmax_in_place, Dataset, Predictor, ProbRows, TrainConfig};
use crate::error::{Error, Result};
use crate::rng::substream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// `classes x d`.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LogisticModel {
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 || bias.len() != weights.len() {
            return Err(Error::config("logistic model needs at least two classes and one bias per class"));
        }
        let d = weights[0].len();
        if let Some(row) = weights.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: row.len() });
        }
        if weights.iter().flatten().chain(&bias).any(|w| !w.is_finite()) {
            return Err(Error::config("logistic parameters must be finite"));
        }
        Ok(LogisticModel { weights, bias })
    }

    pub fn zeros(d: usize, classes: usize) -> Self {
        LogisticModel { weights: vec![vec![0.0; d]; classes], bias: vec![0.0; classes] }
    }

    fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| b + w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>())
            .collect()
    }
}

impl Predictor for LogisticModel {
    fn dims(&self) -> usize {
        self.weights[0].len()
    }

    fn classes(&self) -> usize {
        self.weights.len()
    }

    fn predict(&self, batch: &[Vec<f64>]) -> Result<ProbRows> {
        check_rows(self.dims(), batch)?;
        Ok(batch
            .iter()
            .map(|x| {
                let mut z = self.logits(x);
                softmax_in_place(&mut z);
                z
            })
            .collect())
    }
}

/// Fits a softmax regression on a labelled dataset.
///
/// Weights start from a small seeded uniform draw; every epoch takes one
/// gradient step on the mean cross-entropy over the whole dataset.
pub fn train_logistic(ds: &Dataset, cfg: &TrainConfig) -> Result<LogisticModel> {
    cfg.validate()?;
    if !ds.is_labelled() {
        return Err(Error::UnlabeledDataset);
    }
    let (d, k, n) = (ds.dim(), ds.class_count(), ds.len() as f64);
    let mut rng = substream(cfg.seed, 0);
    let mut model = LogisticModel {
        weights: (0..k).map(|_| (0..d).map(|_| rng.gen_range(-0.01..0.01)).collect()).collect(),
        bias: vec![0.0; k],
    };

    for epoch in 0..cfg.epochs {
        let mut grad_w = vec![vec![0.0; d]; k];
        let mut grad_b = vec![0.0; k];
        let mut loss = 0.0;
        for inst in ds.instances() {
            let label = inst.label.expect("labelled");
            let z = model.logits(&inst.values);
            loss += log_sum_exp(&z) - z[label];
            let mut p = z;
            softmax_in_place(&mut p);
            p[label] -= 1.0;
            for c in 0..k {
                grad_b[c] += p[c];
                for (g, x) in grad_w[c].iter_mut().zip(&inst.values) {
                    *g += p[c] * x;
                }
            }
        }
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        for c in 0..k {
            model.bias[c] -= cfg.lr * grad_b[c] / n;
            for (w, g) in model.weights[c].iter_mut().zip(&grad_w[c]) {
                *w -= cfg.lr * g / n;
            }
        }
        if model.weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err(Error::TrainingDiverged { epoch });
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{accuracy, Instance};

    fn separable() -> Dataset {
        let mut rows = Vec::new();
        for i in 0..40 {
            let a = (i as f64 - 19.5) / 10.0;
            let b = ((i * 7) % 11) as f64 / 5.0 - 1.0;
            rows.push(Instance::labelled(vec![a, b], usize::from(a > 0.0)));
        }
        Dataset::from_instances(2, rows).unwrap()
    }

    #[test]
    fn fits_linearly_separable_data() {
        let ds = separable();
        let cfg = TrainConfig { epochs: 200, lr: 1.0, seed: 1, ..Default::default() };
        let model = train_logistic(&ds, &cfg).unwrap();
        assert_eq!(accuracy(&model, &ds).unwrap(), 1.0);
    }

    #[test]
    fn single_class_fit_prefers_that_class() {
        let rows = (0..10).map(|i| Instance::labelled(vec![i as f64, 1.0], 0)).collect();
        let ds = Dataset::from_instances(2, rows).unwrap();
        let model = train_logistic(&ds, &TrainConfig::default()).unwrap();
        for row in model.predict(&ds.instances().iter().map(|i| i.values.clone()).collect::<Vec<_>>()).unwrap() {
            assert!(row[0] > 0.5);
        }
    }

    #[test]
    fn training_is_reproducible() {
        let ds = separable();
        let cfg = TrainConfig { seed: 42, ..Default::default() };
        let a = train_logistic(&ds, &cfg).unwrap();
        let b = train_logistic(&ds, &cfg).unwrap();
        assert_eq!(a, b);
        let c = train_logistic(&ds, &TrainConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_weights_are_uniform() {
        let m = LogisticModel::zeros(3, 4);
        let rows = m.predict(&[vec![1.0, -2.0, 3.0]]).unwrap();
        assert!(rows[0].iter().all(|p| (p - 0.25).abs() < 1e-15));
        assert!(m.predict(&[]).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        let unlabelled = Dataset::from_instances(1, vec![Instance::new(vec![1.0])]).unwrap();
        assert!(matches!(train_logistic(&unlabelled, &TrainConfig::default()), Err(Error::UnlabeledDataset)));
        let ds = separable();
        assert!(train_logistic(&ds, &TrainConfig { epochs: 0, ..Default::default() }).is_err());
        assert!(train_logistic(&ds, &TrainConfig { lr: 0.0, ..Default::default() }).is_err());
        let m = LogisticModel::zeros(2, 2);
        assert!(matches!(m.predict(&[vec![1.0]]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn huge_learning_rate_diverges() {
        let rows = (0..20).map(|i| Instance::labelled(vec![1e300 * (i as f64 - 9.5)], i % 2)).collect();
        let ds = Dataset::from_instances(1, rows).unwrap();
        let err = train_logistic(&ds, &TrainConfig { lr: 1e300, epochs: 5, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::TrainingDiverged { .. }));
    }
}
