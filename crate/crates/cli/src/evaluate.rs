use std::collections::HashMap;
use std::path::Path;

use bishap::eval::{
    directional_masking_with, gamma_density_sweep, insertion_deletion_auc, mr_masking_curve, CurveOptions, Reference,
};
use bishap::graph::{ranking_order, ExplanationGraph, RedundancyGraph};
use bishap::model::{Dataset, Instance, Predictor};
use bishap::rng::substream;
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::config::{load_dataset, parse_baseline, parse_list, resolve_model};
use crate::record::{read_records, write_atomic, ExplanationRecord};
use crate::{CliError, CliResult, EvaluateArgs, SweepArgs};

const STAGE_RANDOM_RANKING: u64 = 3;

/// Records paired with their dataset instances by id.
fn match_records<'a>(ds: &'a Dataset, records: &[ExplanationRecord]) -> CliResult<Vec<&'a Instance>> {
    let by_id: HashMap<&str, &Instance> = ds.instances().iter().filter_map(|x| Some((x.id.as_deref()?, x))).collect();
    records
        .iter()
        .map(|r| {
            if r.d != ds.dim() {
                return Err(CliError::config(format!("record {} has d = {}, dataset has {}", r.id, r.d, ds.dim())));
            }
            by_id
                .get(r.id.as_str())
                .copied()
                .ok_or_else(|| CliError::config(format!("record {} is not in the dataset", r.id)))
        })
        .collect()
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish_csv(path: &Path, w: csv::Writer<Vec<u8>>) -> CliResult<()> {
    let bytes = w.into_inner().map_err(|e| CliError::runtime(e.to_string()))?;
    write_atomic(path, &String::from_utf8(bytes).map_err(|e| CliError::runtime(e.to_string()))?)
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::runtime(e.to_string())
}

#[derive(Serialize)]
struct AucRow {
    ranking: String,
    insertion_auc: f64,
    deletion_auc: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    instances: usize,
    reference: Reference,
    mr_curve: &'a [bishap::eval::CurvePoint],
    accuracy_sink_masked: f64,
    accuracy_source_masked: f64,
    pct_features_sink_masked: f64,
    pct_features_source_masked: f64,
    auc: &'a [AucRow],
}

pub fn evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let ds = load_dataset(&args.model.data)?;
    let records = read_records(&args.records)?;
    let instances: Vec<Instance> = match_records(&ds, &records)?.into_iter().cloned().collect();
    let baseline = parse_baseline(&args.baseline, &ds)?;
    let fractions = parse_list(&args.fractions)?;
    let source = resolve_model(&args.model, &ds, args.seed)?;
    let p = source.connect()?;
    let reference = if args.label_reference { Reference::Label } else { Reference::Prediction };
    let hs: Vec<RedundancyGraph> = records.iter().map(|r| r.redundancy_graph()).collect::<CliResult<_>>()?;

    let curve = mr_masking_curve(
        p.as_ref(),
        &instances,
        &hs,
        &fractions,
        &baseline,
        &CurveOptions { trials: args.trials, seed: args.seed, reference },
    )?;
    let directional = directional_masking_with(p.as_ref(), &instances, &hs, &baseline, args.seed, reference)?;
    let auc = auc_rows(p.as_ref(), &instances, &records, &baseline, args)?;

    std::fs::create_dir_all(&args.out)?;
    let mut w = csv_writer();
    w.write_record(["fraction", "posthoc_accuracy", "std"]).map_err(csv_err)?;
    for pt in &curve.points {
        w.write_record([pt.fraction.to_string(), pt.value.to_string(), pt.std.to_string()]).map_err(csv_err)?;
    }
    finish_csv(&args.out.join("mr_curve.csv"), w)?;

    let mut w = csv_writer();
    w.write_record(["mask", "posthoc_accuracy_pct", "pct_features_masked"]).map_err(csv_err)?;
    w.write_record([
        "sink",
        &directional.accuracy_sink_masked.to_string(),
        &directional.pct_features_sink_masked.to_string(),
    ])
    .map_err(csv_err)?;
    w.write_record([
        "source",
        &directional.accuracy_source_masked.to_string(),
        &directional.pct_features_source_masked.to_string(),
    ])
    .map_err(csv_err)?;
    finish_csv(&args.out.join("directional.csv"), w)?;

    let mut w = csv_writer();
    for row in &auc {
        w.serialize(row).map_err(csv_err)?;
    }
    finish_csv(&args.out.join("auc.csv"), w)?;

    let summary = Summary {
        instances: instances.len(),
        reference,
        mr_curve: &curve.points,
        accuracy_sink_masked: directional.accuracy_sink_masked,
        accuracy_source_masked: directional.accuracy_source_masked,
        pct_features_sink_masked: directional.pct_features_sink_masked,
        pct_features_source_masked: directional.pct_features_source_masked,
        auc: &auc,
    };
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::runtime(e.to_string()))? + "\n";
    write_atomic(&args.out.join("summary.json"), &text)?;
    println!(
        "evaluated {} instances: sink-masked {:.1}%, source-masked {:.1}% -> {}",
        instances.len(),
        directional.accuracy_sink_masked,
        directional.accuracy_source_masked,
        args.out.display()
    );
    Ok(())
}

/// Mean insertion and deletion AUC for the record ranking, the |phi|
/// ranking and the average of `random_rankings` random permutations.
fn auc_rows(
    p: &dyn Predictor,
    instances: &[Instance],
    records: &[ExplanationRecord],
    baseline: &bishap::model::BaselineSpec,
    args: &EvaluateArgs,
) -> CliResult<Vec<AucRow>> {
    let n = instances.len() as f64;
    let mut sums = [(0.0, 0.0); 3];
    for (k, (x, r)) in instances.iter().zip(records).enumerate() {
        let magnitude: Vec<f64> = r.phi.iter().map(|v| v.abs()).collect();
        for (slot, ranking) in [r.ranking.clone(), ranking_order(&magnitude)].into_iter().enumerate() {
            let a = insertion_deletion_auc(p, x, &ranking, baseline, args.seed)?;
            sums[slot].0 += a.insertion / n;
            sums[slot].1 += a.deletion / n;
        }
        if args.random_rankings > 0 {
            let mut rng = substream(args.seed ^ STAGE_RANDOM_RANKING.rotate_left(40), k as u64);
            let per = args.random_rankings as f64;
            for _ in 0..args.random_rankings {
                let mut perm: Vec<usize> = (0..r.d).collect();
                perm.shuffle(&mut rng);
                let a = insertion_deletion_auc(p, x, &perm, baseline, args.seed)?;
                sums[2].0 += a.insertion / (n * per);
                sums[2].1 += a.deletion / (n * per);
            }
        }
    }
    let names = ["bivariate", "shapley", "random"];
    let count = if args.random_rankings > 0 { 3 } else { 2 };
    Ok(names
        .iter()
        .zip(sums)
        .take(count)
        .map(|(name, (i, d))| AucRow { ranking: name.to_string(), insertion_auc: i, deletion_auc: d })
        .collect())
}

pub fn sweep_gamma(args: &SweepArgs) -> CliResult<()> {
    let ds = load_dataset(&args.model.data)?;
    let records = read_records(&args.records)?;
    let instances: Vec<Instance> = match_records(&ds, &records)?.into_iter().cloned().collect();
    let gammas = parse_list(&args.gammas)?;
    if gammas.iter().any(|g| g.is_nan() || *g < 0.0) {
        return Err(CliError::config("gamma values must be non-negative"));
    }
    if gammas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::config("gamma values must be strictly increasing without repeats"));
    }
    let baseline = parse_baseline(&args.baseline, &ds)?;
    let source = resolve_model(&args.model, &ds, args.seed)?;
    let p = source.connect()?;
    let graphs: Vec<ExplanationGraph> = records.iter().map(|r| r.explanation_graph()).collect();
    let rows = gamma_density_sweep(p.as_ref(), &instances, &graphs, &gammas, &baseline, args.seed)?;

    std::fs::create_dir_all(&args.out)?;
    let mut w = csv_writer();
    for row in &rows {
        w.serialize(row).map_err(csv_err)?;
    }
    finish_csv(&args.out.join("gamma_sweep.csv"), w)?;
    println!("swept {} gamma values over {} records -> {}", rows.len(), records.len(), args.out.display());
    Ok(())
}
