//! Masking-based evaluation of explanations.
//!
//! Every metric masks features of real instances with a baseline and asks
//! whether the model still predicts what it predicted on the unmasked
//! input (post-hoc accuracy), or tracks the probability of that class as
//! features are removed or inserted in ranked order.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::graph::{density, scc, sinks_sources, threshold, ExplanationGraph, RedundancyGraph};
use crate::model::{argmax, mask_values, BaselineSpec, Instance, Predictor};
use crate::rng::{substream2, Rng};
use crate::shapley::InteractionMatrix;

/// Random mask draws per fraction in [`mr_masking_curve`].
pub const DEFAULT_TRIALS: usize = 5;

const PREDICT_CHUNK: usize = 256;

// Substream stages, so that masks and baseline draws never share a stream.
const STAGE_BASELINE: u64 = 1;
const STAGE_MASK: u64 = 2;

/// What a masked prediction is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// The model's prediction on the unmasked instance.
    #[default]
    Prediction,
    /// The dataset label.
    Label,
}

fn predict_all<P: Predictor + ?Sized>(p: &P, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(rows.len());
    for chunk in rows.chunks(PREDICT_CHUNK) {
        out.extend(p.predict(chunk)?);
    }
    Ok(out)
}

fn check_instances<P: Predictor + ?Sized>(p: &P, instances: &[Instance]) -> Result<()> {
    let d = p.dims();
    match instances.iter().find(|x| x.dim() != d) {
        Some(x) => Err(Error::DimensionMismatch { expected: d, found: x.dim() }),
        None => Ok(()),
    }
}

fn reference_classes<P: Predictor + ?Sized>(p: &P, instances: &[Instance], reference: Reference) -> Result<Vec<usize>> {
    match reference {
        Reference::Prediction => {
            let rows: Vec<Vec<f64>> = instances.iter().map(|x| x.values.clone()).collect();
            Ok(predict_all(p, &rows)?.iter().map(|r| argmax(r)).collect())
        }
        Reference::Label => instances.iter().map(|x| x.label.ok_or(Error::UnlabeledDataset)).collect(),
    }
}

/// Baseline row for instance `n` in trial `trial`; fixed across fractions.
fn baseline_row(baseline: &BaselineSpec, d: usize, seed: u64, trial: usize, n: usize) -> Result<Vec<f64>> {
    let mut rng = substream2(seed, STAGE_BASELINE, ((trial as u64) << 32) | n as u64);
    baseline.draw(d, &mut rng)
}

/// Fraction of masked rows whose argmax equals `classes`.
fn agreement<P: Predictor + ?Sized>(
    p: &P,
    instances: &[Instance],
    keeps: &[Coalition],
    baselines: &[Vec<f64>],
    classes: &[usize],
) -> Result<f64> {
    if instances.is_empty() {
        return Ok(1.0);
    }
    let rows: Vec<Vec<f64>> =
        instances.iter().zip(keeps).zip(baselines).map(|((x, &k), b)| mask_values(&x.values, k, b)).collect();
    let probs = predict_all(p, &rows)?;
    let hits = probs.iter().zip(classes).filter(|(r, &c)| argmax(r) == c).count();
    Ok(hits as f64 / instances.len() as f64)
}

fn draw_baselines(baseline: &BaselineSpec, d: usize, count: usize, seed: u64, trial: usize) -> Result<Vec<Vec<f64>>> {
    baseline.validate(d)?;
    (0..count).map(|n| baseline_row(baseline, d, seed, trial, n)).collect()
}

/// Fraction of instances whose masked prediction matches the unmasked one.
pub fn posthoc_accuracy<P: Predictor + ?Sized>(
    p: &P,
    instances: &[Instance],
    keeps: &[Coalition],
    baseline: &BaselineSpec,
    seed: u64,
) -> Result<f64> {
    posthoc_accuracy_with(p, instances, keeps, baseline, seed, Reference::Prediction)
}

pub fn posthoc_accuracy_with<P: Predictor + ?Sized>(
    p: &P,
    instances: &[Instance],
    keeps: &[Coalition],
    baseline: &BaselineSpec,
    seed: u64,
    reference: Reference,
) -> Result<f64> {
    if keeps.len() != instances.len() {
        return Err(Error::DimensionMismatch { expected: instances.len(), found: keeps.len() });
    }
    check_instances(p, instances)?;
    let classes = reference_classes(p, instances, reference)?;
    let baselines = draw_baselines(baseline, p.dims(), instances.len(), seed, 0)?;
    agreement(p, instances, keeps, &baselines, &classes)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fraction: f64,
    /// Mean post-hoc accuracy over trials.
    pub value: f64,
    /// Standard deviation over trials.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskingCurve {
    pub points: Vec<CurvePoint>,
    pub reference: Reference,
    /// `mask_counts[point][instance]`: features masked (same every trial).
    pub mask_counts: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveOptions {
    pub trials: usize,
    pub seed: u64,
    pub reference: Reference,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions { trials: DEFAULT_TRIALS, seed: 0, reference: Reference::Prediction }
    }
}

fn check_fractions(fractions: &[f64]) -> Result<Vec<f64>> {
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::config("mask fractions must lie in [0, 1]"));
    }
    if fractions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("mask fractions must be strictly increasing"));
    }
    let mut out = fractions.to_vec();
    if out.last() != Some(&1.0) {
        out.push(1.0);
    }
    Ok(out)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Post-hoc accuracy while masking random members of mutually redundant
/// groups. For fraction `f`, each SCC `C` of size at least two loses
/// `round(f (|C|-1))` random members, so the final point keeps exactly one
/// member per group. `1.0` is appended to `fractions` if missing.
pub fn mr_masking_curve<P: Predictor + ?Sized>(
    p: &P,
    instances: &[Instance],
    graphs: &[RedundancyGraph],
    fractions: &[f64],
    baseline: &BaselineSpec,
    opts: &CurveOptions,
) -> Result<MaskingCurve> {
    if graphs.len() != instances.len() {
        return Err(Error::DimensionMismatch { expected: instances.len(), found: graphs.len() });
    }
    if opts.trials == 0 {
        return Err(Error::config("at least one trial is required"));
    }
    check_instances(p, instances)?;
    let d = p.dims();
    if let Some(h) = graphs.iter().find(|h| h.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: h.dim() });
    }
    let fractions = check_fractions(fractions)?;
    let classes = reference_classes(p, instances, opts.reference)?;
    let groups: Vec<Vec<Vec<usize>>> = graphs.iter().map(|h| scc(h).groups().cloned().collect()).collect();

    let mut per_trial = vec![Vec::with_capacity(opts.trials); fractions.len()];
    let mut mask_counts = vec![vec![0; instances.len()]; fractions.len()];
    for trial in 0..opts.trials {
        let baselines = draw_baselines(baseline, d, instances.len(), opts.seed, trial)?;
        for (pi, &f) in fractions.iter().enumerate() {
            let mut keeps = Vec::with_capacity(instances.len());
            for (n, inst_groups) in groups.iter().enumerate() {
                let stream = ((trial as u64) << 40) | ((pi as u64) << 24) | n as u64;
                let mut rng: Rng = substream2(opts.seed, STAGE_MASK, stream);
                let mut keep = Coalition::full(d);
                let mut masked = 0;
                for group in inst_groups {
                    let count = (f * (group.len() - 1) as f64).round() as usize;
                    for &i in group.choose_multiple(&mut rng, count) {
                        keep = keep.without(i);
                    }
                    masked += count;
                }
                mask_counts[pi][n] = masked;
                keeps.push(keep);
            }
            per_trial[pi].push(agreement(p, instances, &keeps, &baselines, &classes)?);
        }
    }
    let points = fractions
        .iter()
        .zip(&per_trial)
        .map(|(&fraction, vals)| {
            let (value, std) = mean_std(vals);
            CurvePoint { fraction, value, std }
        })
        .collect();
    Ok(MaskingCurve { points, reference: opts.reference, mask_counts })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionalDetail {
    pub sinks: Vec<usize>,
    pub sources: Vec<usize>,
}

/// Accuracies and masked-feature shares are percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalReport {
    pub accuracy_sink_masked: f64,
    pub accuracy_source_masked: f64,
    pub pct_features_sink_masked: f64,
    pub pct_features_source_masked: f64,
    pub instances: Vec<DirectionalDetail>,
}

/// Post-hoc accuracy after masking every sink, and separately every
/// source, of each instance's redundancy graph.
pub fn directional_masking<P: Predictor + ?Sized>(
    p: &P,
    instances: &[Instance],
    graphs: &[RedundancyGraph],
    baseline: &BaselineSpec,
    seed: u64,
) -> Result<DirectionalReport> {
    directional_masking_with(p, instances, graphs, baseline, seed, Reference::Prediction)
}

pub fn directional_masking_with<P: Predictor + ?Sized>(
    p: &P,
    instances: &[Instance],
    graphs: &[RedundancyGraph],
    baseline: &BaselineSpec,
    seed: u64,
    reference: Reference,
) -> Result<DirectionalReport> {
    if graphs.len() != instances.len() {
        return Err(Error::DimensionMismatch { expected: instances.len(), found: graphs.len() });
    }
    check_instances(p, instances)?;
    let d = p.dims();
    let mut details = Vec::with_capacity(graphs.len());
    for h in graphs {
        if h.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: h.dim() });
        }
        let r = sinks_sources(h)?;
        details.push(DirectionalDetail { sinks: r.sinks, sources: r.sources });
    }
    let classes = reference_classes(p, instances, reference)?;
    let baselines = draw_baselines(baseline, d, instances.len(), seed, 0)?;
    let removing = |set: &[usize]| Coalition::from_indices(set.iter().copied()).complement(d);
    let sink_keeps: Vec<Coalition> = details.iter().map(|x| removing(&x.sinks)).collect();
    let source_keeps: Vec<Coalition> = details.iter().map(|x| removing(&x.sources)).collect();
    let n = instances.len().max(1) as f64;
    let pct = |sel: fn(&DirectionalDetail) -> usize| {
        100.0 * details.iter().map(|x| sel(x) as f64 / d as f64).sum::<f64>() / n
    };
    Ok(DirectionalReport {
        accuracy_sink_masked: 100.0 * agreement(p, instances, &sink_keeps, &baselines, &classes)?,
        accuracy_source_masked: 100.0 * agreement(p, instances, &source_keeps, &baselines, &classes)?,
        pct_features_sink_masked: pct(|x| x.sinks.len()),
        pct_features_source_masked: pct(|x| x.sources.len()),
        instances: details,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucResult {
    pub insertion: f64,
    pub deletion: f64,
    /// Probability of `target` after inserting `k` features, `k = 0..=d`.
    pub insertion_curve: Vec<f64>,
    /// Probability of `target` after deleting `k` features, `k = 0..=d`.
    pub deletion_curve: Vec<f64>,
    pub target: usize,
}

fn trapezoid(curve: &[f64]) -> f64 {
    let steps = (curve.len() - 1) as f64;
    curve.windows(2).map(|w| (w[0] + w[1]) / 2.0).sum::<f64>() / steps
}

/// Insertion and deletion areas for a feature ranking (most important
/// first), on the probability of the class predicted at `x`.
pub fn insertion_deletion_auc<P: Predictor + ?Sized>(
    p: &P,
    x: &Instance,
    ranking: &[usize],
    baseline: &BaselineSpec,
    seed: u64,
) -> Result<AucResult> {
    let d = p.dims();
    if x.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: x.dim() });
    }
    let mut seen = vec![false; d];
    if ranking.len() != d || !ranking.iter().all(|&i| i < d && !std::mem::replace(&mut seen[i], true)) {
        return Err(Error::config(format!("ranking must be a permutation of 0..{d}")));
    }
    let base = baseline_row(baseline, d, seed, 0, 0).and_then(|b| {
        baseline.validate(d)?;
        Ok(b)
    })?;
    let full = Coalition::full(d);
    let mut keeps = Vec::with_capacity(2 * (d + 1));
    let mut deleted = full;
    let mut inserted = Coalition::EMPTY;
    keeps.push(deleted);
    keeps.push(inserted);
    for &i in ranking {
        deleted = deleted.without(i);
        inserted = inserted.with(i);
        keeps.push(deleted);
        keeps.push(inserted);
    }
    let rows: Vec<Vec<f64>> = keeps.iter().map(|&k| mask_values(&x.values, k, &base)).collect();
    let probs = predict_all(p, &rows)?;
    let target = argmax(&probs[0]);
    let deletion_curve: Vec<f64> = probs.iter().step_by(2).map(|r| r[target]).collect();
    let insertion_curve: Vec<f64> = probs.iter().skip(1).step_by(2).map(|r| r[target]).collect();
    Ok(AucResult {
        insertion: trapezoid(&insertion_curve),
        deletion: trapezoid(&deletion_curve),
        insertion_curve,
        deletion_curve,
        target,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub mean_density: f64,
    /// Post-hoc accuracy after masking sinks, as a fraction.
    pub sink_masked_accuracy: f64,
}

/// Redundancy-graph density and sink-masked accuracy per threshold.
pub fn gamma_density_sweep<P: Predictor + ?Sized>(
    p: &P,
    instances: &[Instance],
    graphs: &[ExplanationGraph],
    gammas: &[f64],
    baseline: &BaselineSpec,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if gammas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("gamma values must be strictly increasing"));
    }
    if graphs.is_empty() {
        return Err(Error::config("gamma sweep needs at least one graph"));
    }
    gammas
        .iter()
        .map(|&gamma| {
            let hs: Vec<RedundancyGraph> = graphs.iter().map(|g| threshold(g, gamma)).collect::<Result<_>>()?;
            let mean_density = hs.iter().map(density).sum::<Result<f64>>()? / hs.len() as f64;
            let report = directional_masking(p, instances, &hs, baseline, seed)?;
            Ok(SweepRow { gamma, mean_density, sink_masked_accuracy: report.accuracy_sink_masked / 100.0 })
        })
        .collect()
}

/// Entrywise mean of the matrices sharing each label.
pub fn average_graph<L: Ord + Clone>(
    matrices: &[InteractionMatrix],
    labels: &[L],
) -> Result<BTreeMap<L, InteractionMatrix>> {
    if matrices.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: matrices.len(), found: labels.len() });
    }
    let Some(first) = matrices.first() else {
        return Ok(BTreeMap::new());
    };
    let d = first.dim();
    let mut sums: BTreeMap<L, (InteractionMatrix, usize)> = BTreeMap::new();
    for (m, label) in matrices.iter().zip(labels) {
        m.validate()?;
        if m.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.dim() });
        }
        let entry = sums
            .entry(label.clone())
            .or_insert_with(|| (InteractionMatrix { values: vec![vec![0.0; d]; d], ..m.clone() }, 0));
        for (acc, row) in entry.0.values.iter_mut().zip(&m.values) {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        entry.1 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(label, (mut m, n))| {
            m.values.iter_mut().flatten().for_each(|v| *v /= n as f64);
            (label, m)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::model::LogisticModel;
    use crate::shapley::Method;

    /// Two classes; logit of class 1 is `w·x + b`.
    fn logistic(w: Vec<f64>, b: f64) -> LogisticModel {
        let d = w.len();
        LogisticModel::new(vec![vec![0.0; d], w], vec![0.0, b]).unwrap()
    }

    struct Constant(usize);

    impl Predictor for Constant {
        fn dims(&self) -> usize {
            self.0
        }
        fn classes(&self) -> usize {
            2
        }
        fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
            Ok(rows.iter().map(|_| vec![0.3, 0.7]).collect())
        }
    }

    fn instances(rows: &[&[f64]]) -> Vec<Instance> {
        rows.iter().map(|r| Instance::new(r.to_vec())).collect()
    }

    #[test]
    fn full_keep_sets_are_perfect() {
        let p = logistic(vec![1.0, -2.0, 0.5], 0.1);
        let xs = instances(&[&[1.0, 2.0, 3.0], &[-1.0, 0.0, 4.0], &[0.3, 0.3, -3.0]]);
        let keeps = vec![Coalition::full(3); 3];
        assert_eq!(posthoc_accuracy(&p, &xs, &keeps, &BaselineSpec::Zero, 0).unwrap(), 1.0);
        let empty = vec![Coalition::EMPTY; 3];
        assert_eq!(posthoc_accuracy(&Constant(3), &xs, &empty, &BaselineSpec::Zero, 0).unwrap(), 1.0);
    }

    #[test]
    fn dictator_model_masking() {
        let p = logistic(vec![4.0, 0.0], 0.0);
        let xs = instances(&[&[1.0, 5.0], &[-1.0, 5.0], &[2.0, -5.0], &[-2.0, -5.0]]);
        let keep0 = vec![Coalition::singleton(0); 4];
        assert_eq!(posthoc_accuracy(&p, &xs, &keep0, &BaselineSpec::Zero, 0).unwrap(), 1.0);
        // Removing feature 0 sends every instance to the logit-0 tie, which
        // resolves to class 0 and so flips the positive instances.
        let keep1 = vec![Coalition::singleton(1); 4];
        let acc = posthoc_accuracy(&p, &xs, &keep1, &BaselineSpec::Zero, 0).unwrap();
        assert!(acc < 1.0);
    }

    #[test]
    fn label_reference_needs_labels() {
        let p = logistic(vec![1.0], 0.0);
        let xs = instances(&[&[1.0]]);
        let keeps = vec![Coalition::full(1)];
        let r = posthoc_accuracy_with(&p, &xs, &keeps, &BaselineSpec::Zero, 0, Reference::Label);
        assert!(matches!(r, Err(Error::UnlabeledDataset)));
        let labelled = vec![Instance::labelled(vec![1.0], 0)];
        let acc = posthoc_accuracy_with(&p, &labelled, &keeps, &BaselineSpec::Zero, 0, Reference::Label).unwrap();
        assert_eq!(acc, 0.0);
    }

    #[test]
    fn curve_without_groups_is_flat() {
        let p = logistic(vec![1.0, -1.0, 2.0], 0.0);
        let xs = instances(&[&[1.0, 2.0, 3.0], &[3.0, 2.0, -1.0]]);
        let hs = vec![RedundancyGraph::from_edges(3, &[(0, 1)], 0.0).unwrap(); 2];
        let c = mr_masking_curve(&p, &xs, &hs, &[0.0, 0.5], &BaselineSpec::Zero, &CurveOptions::default()).unwrap();
        assert_eq!(c.points.iter().map(|p| p.fraction).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        assert!(c.points.iter().all(|p| p.value == 1.0));
        assert!(c.mask_counts.iter().flatten().all(|&n| n == 0));
    }

    #[test]
    fn duplicated_signal_survives_masking_one_copy() {
        // Both copies feed the model equally; the third feature is ignored.
        let p = logistic(vec![3.0, 3.0, 0.0], 0.0);
        let xs = instances(&[&[1.0, 1.0, 0.2], &[-1.0, -1.0, 0.7], &[2.0, 2.0, -0.4], &[-0.5, -0.5, 1.0]]);
        let hs = vec![RedundancyGraph::from_edges(3, &[(0, 1), (1, 0)], 0.0).unwrap(); 4];
        let opts = CurveOptions { trials: 3, seed: 9, ..Default::default() };
        let c = mr_masking_curve(&p, &xs, &hs, &[0.0, 0.5], &BaselineSpec::Zero, &opts).unwrap();
        assert!(c.points.iter().all(|p| p.value == 1.0));
        assert_eq!(c.mask_counts.last().unwrap(), &vec![1; 4]);
        let again = mr_masking_curve(&p, &xs, &hs, &[0.0, 0.5], &BaselineSpec::Zero, &opts).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn curve_rejects_bad_fractions() {
        let p = Constant(2);
        let xs = instances(&[&[0.0, 0.0]]);
        let hs = vec![RedundancyGraph::from_edges(2, &[], 0.0).unwrap()];
        let opts = CurveOptions::default();
        assert!(mr_masking_curve(&p, &xs, &hs, &[0.5, 0.2], &BaselineSpec::Zero, &opts).is_err());
        assert!(mr_masking_curve(&p, &xs, &hs, &[1.5], &BaselineSpec::Zero, &opts).is_err());
    }

    #[test]
    fn directional_on_edgeless_graphs() {
        let p = logistic(vec![1.0, 1.0], 0.0);
        let xs = instances(&[&[1.0, 1.0], &[-1.0, 2.0]]);
        let hs = vec![RedundancyGraph::from_edges(2, &[], 0.0).unwrap(); 2];
        let r = directional_masking(&p, &xs, &hs, &BaselineSpec::Zero, 0).unwrap();
        assert_eq!((r.accuracy_sink_masked, r.accuracy_source_masked), (100.0, 100.0));
        assert_eq!((r.pct_features_sink_masked, r.pct_features_source_masked), (0.0, 0.0));
    }

    #[test]
    fn directional_on_dictator_graph() {
        // Feature 0 decides the class; features 1 and 2 are redundant given 0.
        let p = logistic(vec![5.0, 0.0, 0.0], 0.0);
        let xs = instances(&[&[1.0, 0.3, 0.1], &[-1.0, 0.2, 0.9], &[0.5, -1.0, 2.0], &[-2.0, 1.0, 1.0]]);
        let h = RedundancyGraph::from_edges(3, &[(0, 1), (0, 2), (1, 2), (2, 1)], 0.0).unwrap();
        let hs = vec![h; 4];
        let r = directional_masking(&p, &xs, &hs, &BaselineSpec::Zero, 0).unwrap();
        assert_eq!(r.accuracy_sink_masked, 100.0);
        assert!(r.accuracy_source_masked <= 60.0);
        let third = 100.0 / 3.0;
        assert!((r.pct_features_source_masked - third).abs() < 1e-9);
        assert!((r.pct_features_sink_masked - 2.0 * third).abs() < 1e-9);
        assert!(r.instances.iter().all(|x| x.sinks.iter().all(|s| !x.sources.contains(s))));
    }

    #[test]
    fn auc_curves_share_endpoints() {
        let p = logistic(vec![2.0, -1.0, 0.5, 0.1], -0.3);
        let x = Instance::new(vec![1.0, -2.0, 0.5, 3.0]);
        let base = BaselineSpec::Fixed(vec![0.1, 0.2, -0.3, 0.0]);
        let r = insertion_deletion_auc(&p, &x, &[2, 0, 3, 1], &base, 0).unwrap();
        assert_eq!(r.deletion_curve.len(), 5);
        assert_eq!(r.deletion_curve[0], *r.insertion_curve.last().unwrap());
        assert_eq!(r.insertion_curve[0], *r.deletion_curve.last().unwrap());
    }

    #[test]
    fn auc_on_constant_and_dictator() {
        let x = Instance::new(vec![1.0, 1.0]);
        let r = insertion_deletion_auc(&Constant(2), &x, &[0, 1], &BaselineSpec::Zero, 0).unwrap();
        assert!((r.insertion - 0.7).abs() < 1e-15 && (r.deletion - 0.7).abs() < 1e-15);

        let p = logistic(vec![4.0, 0.0, 0.0], 0.0);
        let x = Instance::new(vec![1.0, 1.0, 1.0]);
        let good = insertion_deletion_auc(&p, &x, &[0, 1, 2], &BaselineSpec::Zero, 0).unwrap();
        let bad = insertion_deletion_auc(&p, &x, &[2, 1, 0], &BaselineSpec::Zero, 0).unwrap();
        assert!(good.deletion < bad.deletion);
        assert!(good.insertion > bad.insertion);

        let one = logistic(vec![1.0], 0.0);
        let r = insertion_deletion_auc(&one, &Instance::new(vec![2.0]), &[0], &BaselineSpec::Zero, 0).unwrap();
        assert_eq!(r.deletion_curve.len(), 2);
        assert_eq!(r.insertion_curve.len(), 2);
    }

    #[test]
    fn auc_rejects_non_permutations() {
        let p = Constant(3);
        let x = Instance::new(vec![0.0; 3]);
        for bad in [vec![0, 1], vec![0, 1, 1], vec![0, 1, 3]] {
            assert!(matches!(
                insertion_deletion_auc(&p, &x, &bad, &BaselineSpec::Zero, 0),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    fn matrix(values: Vec<Vec<f64>>) -> InteractionMatrix {
        InteractionMatrix::new(values, Method::Exact).unwrap()
    }

    #[test]
    fn sweep_extremes_and_order() {
        let p = Constant(2);
        let xs = instances(&[&[1.0, 2.0]]);
        let g = build_graph(&matrix(vec![vec![0.0, 0.4], vec![0.2, 0.0]])).unwrap();
        let rows = gamma_density_sweep(&p, &xs, std::slice::from_ref(&g), &[0.0, 1.4], &BaselineSpec::Zero, 0).unwrap();
        assert_eq!(rows.iter().map(|r| r.mean_density).collect::<Vec<_>>(), vec![0.0, 1.0]);
        assert!(gamma_density_sweep(&p, &xs, &[g], &[0.1, 0.1], &BaselineSpec::Zero, 0).is_err());
    }

    #[test]
    fn averaging() {
        let m = matrix(vec![vec![1.0, -2.0], vec![0.5, 3.0]]);
        let neg = matrix(vec![vec![-1.0, 2.0], vec![-0.5, -3.0]]);
        let out = average_graph(std::slice::from_ref(&m), &["a"]).unwrap();
        assert_eq!(out["a"], m);
        let out = average_graph(&[m.clone(), neg], &["a", "a"]).unwrap();
        assert!(out["a"].values.iter().flatten().all(|&v| v == 0.0));
        let out = average_graph(&[m.clone(), m.clone(), m.clone()], &[1, 1, 1]).unwrap();
        assert_eq!(out[&1], m);
        let small = matrix(vec![vec![0.0]]);
        assert!(matches!(average_graph(&[m, small], &[0, 0]), Err(Error::DimensionMismatch { .. })));
    }
}
