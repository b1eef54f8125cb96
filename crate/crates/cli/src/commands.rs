use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use bishap::eval::average_graph;
use bishap::graph::{build_graph, redundancy_rank_with};
use bishap::model::{accuracy, BaselineSpec, Instance, Predictor};
use bishap::rng::substream2;
use bishap::shapley::{
    default_kernel_samples, exact_explanation, kernel_bivariate, sampling_bivariate, Method, DEFAULT_SAMPLING_SAMPLES,
    MAX_EXACT_PLAYERS,
};
use bishap::utility::{model_utility, UtilityOptions};
use bishap::Error;
use rand::RngCore;
use serde::Serialize;

use crate::config::{load_dataset, parse_baseline, resolve_model, train_builtin, train_config, ModelSource, ModelSpec};
use crate::record::{read_records, record_path, write_atomic, AnalysisConfig, ExplanationRecord};
use crate::{AnalyzeArgs, CliError, CliResult, ExplainArgs, TrainArgs};

// Substream stages derived from `--seed`.
const STAGE_BASELINE: u64 = 1;
const STAGE_ESTIMATOR: u64 = 2;

pub fn train(args: &TrainArgs) -> CliResult<()> {
    let ds = load_dataset(&args.model.data)?;
    let spec: ModelSpec = args.model.model.parse()?;
    let model = train_builtin(&spec, &ds, &train_config(&args.model, args.seed))?;
    std::fs::create_dir_all(&args.out)?;
    let path = args.out.join("model.json");
    write_atomic(&path, &(model.to_json()? + "\n"))?;
    println!(
        "trained {} on {} rows, accuracy {:.4} -> {}",
        args.model.model,
        ds.len(),
        accuracy(&model, &ds)?,
        path.display()
    );
    Ok(())
}

struct ExplainJob<'a> {
    method: Method,
    samples: usize,
    seed: u64,
    baseline: &'a BaselineSpec,
    references: usize,
    analysis: AnalysisConfig,
    timing: bool,
}

impl ExplainJob<'_> {
    fn run(&self, p: &dyn Predictor, n: usize, x: &Instance) -> CliResult<ExplanationRecord> {
        let start = Instant::now();
        let opts = UtilityOptions { references_per_eval: self.references, ..UtilityOptions::default() };
        let mut rng = substream2(self.seed, STAGE_BASELINE, n as u64);
        let game = model_utility(p, x, self.baseline, &opts, &mut rng)?;
        let estimator_seed = substream2(self.seed, STAGE_ESTIMATOR, n as u64).next_u64();
        let (phi, m) = match self.method {
            Method::Exact => exact_explanation(&game)?,
            Method::Sampling => sampling_bivariate(&game, self.samples, estimator_seed)?,
            Method::Kernel => kernel_bivariate(&game, self.samples, estimator_seed)?,
        };
        let id = x.id.clone().unwrap_or_else(|| n.to_string());
        let mut record = ExplanationRecord::build(id, game.target, self.seed, &phi, &m, &self.analysis)?;
        if self.timing {
            record.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        }
        Ok(record)
    }
}

pub fn explain(args: &ExplainArgs) -> CliResult<()> {
    let ds = load_dataset(&args.model.data)?;
    let d = ds.dim();
    let method: Method = args.method.parse()?;
    let analysis = AnalysisConfig::from(&args.graph);
    analysis.validate()?;
    let samples = match (method, args.samples) {
        (Method::Exact, _) => 0,
        (_, Some(0)) => return Err(CliError::config("--samples must be at least 1")),
        (Method::Kernel, Some(m)) if d >= 2 && m < d + 2 => {
            return Err(CliError::config(format!("kernel method needs --samples >= d + 2 = {}", d + 2)))
        }
        (_, Some(m)) => m,
        (Method::Sampling, None) => DEFAULT_SAMPLING_SAMPLES,
        (Method::Kernel, None) => default_kernel_samples(d),
    };
    if method == Method::Exact && d > MAX_EXACT_PLAYERS {
        return Err(Error::GameTooLarge { d, max: MAX_EXACT_PLAYERS }.into());
    }
    if args.jobs == 0 {
        return Err(CliError::config("--jobs must be at least 1"));
    }
    let baseline = parse_baseline(&args.baseline, &ds)?;
    let source = resolve_model(&args.model, &ds, args.seed)?;
    std::fs::create_dir_all(&args.out)?;

    let instances: Vec<&Instance> = ds.instances().iter().take(args.limit).collect();
    let job = ExplainJob {
        method,
        samples,
        seed: args.seed,
        baseline: &baseline,
        references: args.references,
        analysis,
        timing: args.timing,
    };
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let errors: Mutex<Vec<(usize, CliError)>> = Mutex::new(Vec::new());
    let written = AtomicUsize::new(0);
    let worker = |source: &ModelSource| {
        let predictor = match source.connect() {
            Ok(p) => p,
            Err(e) => {
                failed.store(true, Ordering::SeqCst);
                errors.lock().unwrap().push((0, e));
                return;
            }
        };
        while !failed.load(Ordering::SeqCst) {
            let n = next.fetch_add(1, Ordering::SeqCst);
            let Some(x) = instances.get(n) else { break };
            let id = x.id.clone().unwrap_or_else(|| n.to_string());
            let path = record_path(&args.out, &id);
            if args.resume && path.exists() {
                continue;
            }
            let result = job.run(predictor.as_ref(), n, x).and_then(|r| write_atomic(&path, &r.to_json()?));
            match result {
                Ok(()) => {
                    written.fetch_add(1, Ordering::SeqCst);
                }
                Err(e) => {
                    failed.store(true, Ordering::SeqCst);
                    errors.lock().unwrap().push((n, e));
                }
            }
        }
    };
    let jobs = args.jobs.min(instances.len().max(1));
    if jobs == 1 {
        worker(&source);
    } else {
        std::thread::scope(|s| {
            for _ in 0..jobs {
                s.spawn(|| worker(&source));
            }
        });
    }
    let mut errors = errors.into_inner().unwrap();
    errors.sort_by_key(|(n, _)| *n);
    if let Some((_, e)) = errors.into_iter().next() {
        return Err(e);
    }
    println!(
        "explained {} of {} instances ({method}, d = {d}) -> {}",
        written.load(Ordering::SeqCst),
        instances.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct GlobalGroup {
    label: String,
    count: usize,
    interaction: Vec<Vec<f64>>,
    scores: Vec<f64>,
    ranking: Vec<usize>,
}

pub fn analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let cfg = AnalysisConfig::from(&args.graph);
    cfg.validate()?;
    let mut records = read_records(&args.records)?;
    let labels: BTreeMap<String, usize> = match &args.data {
        Some(path) => load_dataset(path)?.instances().iter().filter_map(|x| Some((x.id.clone()?, x.label?))).collect(),
        None => BTreeMap::new(),
    };
    std::fs::create_dir_all(&args.out)?;
    for r in &mut records {
        r.reanalyze(&cfg)?;
        write_atomic(&record_path(&args.out, &r.id), &r.to_json()?)?;
    }

    let group_of = |r: &ExplanationRecord| match labels.get(&r.id) {
        Some(l) => format!("label={l}"),
        None => "all".to_string(),
    };
    let matrices: Vec<_> = records.iter().map(|r| r.interaction_matrix()).collect();
    let groups: Vec<String> = records.iter().map(group_of).collect();
    let averaged = average_graph(&matrices, &groups)?;
    let mut global = Vec::new();
    for (label, m) in averaged {
        let members: Vec<&ExplanationRecord> = records.iter().filter(|r| group_of(r) == label).collect();
        let d = m.dim();
        let mean_phi: Vec<f64> =
            (0..d).map(|i| members.iter().map(|r| r.phi[i]).sum::<f64>() / members.len() as f64).collect();
        let g = build_graph(&m)?;
        let rank = redundancy_rank_with(&g, cfg.personalize.then_some(mean_phi.as_slice()), cfg.damping)?;
        global.push(GlobalGroup {
            label,
            count: members.len(),
            interaction: m.values,
            ranking: rank.order(),
            scores: rank.scores,
        });
    }
    let text = serde_json::to_string_pretty(&global).map_err(|e| CliError::runtime(e.to_string()))? + "\n";
    write_atomic(&args.out.join("global.json"), &text)?;
    println!("analyzed {} records, {} global groups -> {}", records.len(), global.len(), args.out.display());
    Ok(())
}
