//! Labelled synthetic datasets with known redundancy structure.

use rand::Rng as _;

use super::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::rng::substream;

/// Duplicated-signal dataset.
///
/// Features `0..copies` hold the same signal `s = ±scale·U(0.5, 1)`; the
/// remaining `noise` features are independent `U(-1, 1)`. The label is
/// `1` when `s > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub instances: usize,
    pub copies: usize,
    pub noise: usize,
    pub scale: f64,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec { instances: 200, copies: 3, noise: 9, scale: 50.0, seed: 0 }
    }
}

impl PlantedSpec {
    pub fn dim(&self) -> usize {
        self.copies + self.noise
    }
}

pub fn planted_redundancy(spec: &PlantedSpec) -> Result<Dataset> {
    if spec.copies == 0 || spec.instances == 0 {
        return Err(Error::config("planted dataset needs at least one copy and one instance"));
    }
    if !(spec.scale.is_finite() && spec.scale > 0.0) {
        return Err(Error::config("planted signal scale must be positive"));
    }
    let mut rng = substream(spec.seed, 0x706c616e);
    let rows = (0..spec.instances)
        .map(|n| {
            let positive = rng.gen_bool(0.5);
            let magnitude = spec.scale * rng.gen_range(0.5..1.0);
            let s = if positive { magnitude } else { -magnitude };
            let mut values = vec![s; spec.copies];
            values.extend((0..spec.noise).map(|_| rng.gen_range(-1.0..1.0)));
            Instance::labelled(values, usize::from(positive)).with_id(n.to_string())
        })
        .collect();
    let names =
        (0..spec.copies).map(|i| format!("copy{i}")).chain((0..spec.noise).map(|i| format!("noise{i}"))).collect();
    Dataset::new(spec.dim(), 2, rows)?.with_feature_names(names)
}
