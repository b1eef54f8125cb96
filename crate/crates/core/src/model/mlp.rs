//! One-hidden-layer perceptron with `tanh` activation and softmax output,
//! trained by mini-batch stochastic gradient descent.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{check_rows, log_sum_exp, softmax_in_place, Dataset, Predictor, ProbRows, TrainConfig};
use crate::error::{Error, Result};
use crate::rng::substream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// `hidden x d`.
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    /// `classes x hidden`.
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

impl MlpModel {
    fn hidden(&self, x: &[f64]) -> Vec<f64> {
        self.w1
            .iter()
            .zip(&self.b1)
            .map(|(w, b)| (b + w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>()).tanh())
            .collect()
    }

    fn logits(&self, h: &[f64]) -> Vec<f64> {
        self.w2.iter().zip(&self.b2).map(|(w, b)| b + w.iter().zip(h).map(|(wi, hi)| wi * hi).sum::<f64>()).collect()
    }

    pub fn hidden_width(&self) -> usize {
        self.w1.len()
    }
}

impl Predictor for MlpModel {
    fn dims(&self) -> usize {
        self.w1[0].len()
    }

    fn classes(&self) -> usize {
        self.w2.len()
    }

    fn predict(&self, batch: &[Vec<f64>]) -> Result<ProbRows> {
        check_rows(self.dims(), batch)?;
        Ok(batch
            .iter()
            .map(|x| {
                let mut z = self.logits(&self.hidden(x));
                softmax_in_place(&mut z);
                z
            })
            .collect())
    }
}

fn glorot(rows: usize, cols: usize, rng: &mut crate::rng::Rng) -> Vec<Vec<f64>> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-limit..limit)).collect()).collect()
}

/// Trains an MLP with `cfg.hidden` units and mini-batches of
/// `cfg.batch_size`; the visiting order is reshuffled every epoch from the
/// seeded stream.
pub fn train_mlp(ds: &Dataset, cfg: &TrainConfig) -> Result<MlpModel> {
    cfg.validate()?;
    if cfg.hidden == 0 {
        return Err(Error::config("hidden layer width must be at least 1"));
    }
    if cfg.batch_size == 0 {
        return Err(Error::config("batch size must be at least 1"));
    }
    if !ds.is_labelled() {
        return Err(Error::UnlabeledDataset);
    }
    let (d, k, h) = (ds.dim(), ds.class_count(), cfg.hidden);
    let mut rng = substream(cfg.seed, 0);
    let mut model =
        MlpModel { w1: glorot(h, d, &mut rng), b1: vec![0.0; h], w2: glorot(k, h, &mut rng), b2: vec![0.0; k] };
    let mut order: Vec<usize> = (0..ds.len()).collect();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let mut g_w1 = vec![vec![0.0; d]; h];
            let mut g_b1 = vec![0.0; h];
            let mut g_w2 = vec![vec![0.0; h]; k];
            let mut g_b2 = vec![0.0; k];
            for &idx in chunk {
                let inst = &ds.instances()[idx];
                let label = inst.label.expect("labelled");
                let hid = model.hidden(&inst.values);
                let z = model.logits(&hid);
                loss += log_sum_exp(&z) - z[label];
                let mut dz = z;
                softmax_in_place(&mut dz);
                dz[label] -= 1.0;
                let mut dh = vec![0.0; h];
                for c in 0..k {
                    g_b2[c] += dz[c];
                    for u in 0..h {
                        g_w2[c][u] += dz[c] * hid[u];
                        dh[u] += dz[c] * model.w2[c][u];
                    }
                }
                for u in 0..h {
                    let da = dh[u] * (1.0 - hid[u] * hid[u]);
                    g_b1[u] += da;
                    for (g, x) in g_w1[u].iter_mut().zip(&inst.values) {
                        *g += da * x;
                    }
                }
            }
            let step = cfg.lr / chunk.len() as f64;
            for c in 0..k {
                model.b2[c] -= step * g_b2[c];
                for u in 0..h {
                    model.w2[c][u] -= step * g_w2[c][u];
                }
            }
            for u in 0..h {
                model.b1[u] -= step * g_b1[u];
                for (w, g) in model.w1[u].iter_mut().zip(&g_w1[u]) {
                    *w -= step * g;
                }
            }
        }
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
    }
    Ok(model)
}
