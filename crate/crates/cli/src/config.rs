//! Parsing of model, baseline and list flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use bishap::model::{
    train_logistic, train_mlp, AdapterModel, BaselineSpec, BuiltinModel, Dataset, Predictor, TrainConfig,
};

use crate::{CliError, CliResult, ModelArgs};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSpec {
    Logistic,
    Mlp,
    /// A model JSON written by `train`.
    Saved(PathBuf),
    /// Shell command speaking the line-delimited JSON protocol.
    Adapter(String),
}

impl FromStr for ModelSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.split_once(':') {
            Some(("builtin", "logistic")) => Ok(ModelSpec::Logistic),
            Some(("builtin", "mlp")) => Ok(ModelSpec::Mlp),
            Some(("saved", path)) if !path.is_empty() => Ok(ModelSpec::Saved(PathBuf::from(path))),
            Some(("adapter", cmd)) if !cmd.trim().is_empty() => Ok(ModelSpec::Adapter(cmd.to_string())),
            _ => Err(CliError::config(format!(
                "unknown model {s:?}; expected builtin:logistic, builtin:mlp, saved:<path> or adapter:<command>"
            ))),
        }
    }
}

/// A model ready to hand out predictors, one per worker.
pub enum ModelSource {
    Builtin(BuiltinModel),
    Adapter(String),
}

impl ModelSource {
    /// A predictor for the calling thread. Adapters get a fresh process.
    pub fn connect(&self) -> CliResult<Box<dyn Predictor + '_>> {
        Ok(match self {
            ModelSource::Builtin(m) => Box::new(m),
            ModelSource::Adapter(cmd) => Box::new(AdapterModel::spawn(cmd)?),
        })
    }
}

pub fn train_config(args: &ModelArgs, seed: u64) -> TrainConfig {
    TrainConfig { epochs: args.epochs, lr: args.lr, seed, hidden: args.hidden, batch_size: args.batch_size }
}

pub fn train_builtin(spec: &ModelSpec, ds: &Dataset, cfg: &TrainConfig) -> CliResult<BuiltinModel> {
    Ok(match spec {
        ModelSpec::Logistic => BuiltinModel::Logistic(train_logistic(ds, cfg)?),
        ModelSpec::Mlp => BuiltinModel::Mlp(train_mlp(ds, cfg)?),
        _ => return Err(CliError::config("only builtin:logistic and builtin:mlp can be trained")),
    })
}

/// Resolves `--model` against the dataset: built-ins are trained on it,
/// saved and adapter models are checked against its dimension.
pub fn resolve_model(args: &ModelArgs, ds: &Dataset, seed: u64) -> CliResult<ModelSource> {
    let spec: ModelSpec = args.model.parse()?;
    let source = match &spec {
        ModelSpec::Logistic | ModelSpec::Mlp => {
            ModelSource::Builtin(train_builtin(&spec, ds, &train_config(args, seed))?)
        }
        ModelSpec::Saved(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read model {}: {e}", path.display())))?;
            ModelSource::Builtin(
                BuiltinModel::from_json(&text)
                    .map_err(|e| CliError::config(format!("bad model file {}: {e}", path.display())))?,
            )
        }
        ModelSpec::Adapter(cmd) => ModelSource::Adapter(cmd.clone()),
    };
    let d = source.connect()?.dims();
    if d != ds.dim() {
        return Err(CliError::config(format!("model expects {d} features, dataset has {}", ds.dim())));
    }
    Ok(source)
}

pub fn load_dataset(path: &Path) -> CliResult<Dataset> {
    Dataset::load_csv(path).map_err(|e| CliError::config(format!("cannot load {}: {e}", path.display())))
}

/// `zero`, `mean`, `fixed:<v1,...>` or `refs:<csv>`.
pub fn parse_baseline(arg: &str, ds: &Dataset) -> CliResult<BaselineSpec> {
    let spec = match arg.split_once(':') {
        None if arg == "zero" => BaselineSpec::Zero,
        None if arg == "mean" => BaselineSpec::dataset_mean(ds),
        Some(("fixed", row)) => BaselineSpec::Fixed(parse_list(row)?),
        Some(("refs", path)) => BaselineSpec::references(&load_dataset(Path::new(path))?),
        _ => return Err(CliError::config(format!("unknown baseline {arg:?}"))),
    };
    spec.validate(ds.dim())?;
    Ok(spec)
}

/// Comma-separated reals.
pub fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::config(format!("cannot parse {v:?} as a number"))))
        .collect()
}

/// `a..b`, half open.
pub fn parse_range(s: &str) -> CliResult<std::ops::Range<u64>> {
    let bad = || CliError::config(format!("expected a range like 0..10, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a >= b {
        return Err(bad());
    }
    Ok(a..b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_specs() {
        assert_eq!("builtin:mlp".parse::<ModelSpec>().unwrap(), ModelSpec::Mlp);
        assert_eq!(
            "adapter:python3 m.py --x 1".parse::<ModelSpec>().unwrap(),
            ModelSpec::Adapter("python3 m.py --x 1".into())
        );
        assert_eq!("saved:a/b.json".parse::<ModelSpec>().unwrap(), ModelSpec::Saved("a/b.json".into()));
        assert!("builtin:forest".parse::<ModelSpec>().is_err());
        assert!("adapter:".parse::<ModelSpec>().is_err());
    }

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("0, 1e-5,2").unwrap(), vec![0.0, 1e-5, 2.0]);
        assert!(parse_list("1,x").is_err());
        assert_eq!(parse_range("3..7").unwrap(), 3..7);
        assert!(parse_range("7..3").is_err());
        assert!(parse_range("7").is_err());
    }

    #[test]
    fn baselines() {
        let ds = Dataset::read_csv("a,b,label\n1,2,0\n3,4,1\n".as_bytes()).unwrap();
        assert_eq!(parse_baseline("zero", &ds).unwrap(), BaselineSpec::Zero);
        assert_eq!(parse_baseline("mean", &ds).unwrap(), BaselineSpec::DatasetMean(vec![2.0, 3.0]));
        assert_eq!(parse_baseline("fixed:1,1", &ds).unwrap(), BaselineSpec::Fixed(vec![1.0, 1.0]));
        assert!(parse_baseline("fixed:1", &ds).is_err());
        assert!(parse_baseline("median", &ds).is_err());
    }
}
