//! Command-line front end: `train`, `explain`, `analyze`, `evaluate`,
//! `sweep-gamma` and `verify`.
//!
//! Exit codes: `0` success, `1` verification failure, `2` configuration or
//! input error, `3` adapter or runtime failure.

mod commands;
pub mod config;
mod evaluate;
pub mod record;
pub mod verify;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use record::ExplanationRecord;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError { code: EXIT_RUNTIME, message: message.into() }
    }

    pub fn verify(message: impl Into<String>) -> Self {
        CliError { code: EXIT_VERIFY, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<bishap::Error> for CliError {
    fn from(e: bishap::Error) -> Self {
        use bishap::Error as E;
        let code = match e {
            E::AdapterProtocol(_) | E::TrainingDiverged { .. } | E::RegressionSingular { .. } | E::Io(_) => {
                EXIT_RUNTIME
            }
            E::UnlabeledDataset
            | E::InvalidConfig(_)
            | E::DimensionMismatch { .. }
            | E::GameTooLarge { .. }
            | E::InvalidMatrix(_)
            | E::InvalidDataset(_)
            | E::Csv(_)
            | E::Json(_) => EXIT_CONFIG,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "bishap", version, about = "Directional bivariate Shapley explanations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a built-in model and save it as JSON.
    Train(TrainArgs),
    /// Explain instances and write one record per instance.
    Explain(ExplainArgs),
    /// Re-run graph analysis on existing records.
    Analyze(AnalyzeArgs),
    /// Masking evaluation of existing records.
    Evaluate(EvaluateArgs),
    /// Redundancy-graph density and sink masking over thresholds.
    SweepGamma(SweepArgs),
    /// Check the Shapley properties on the synthetic game catalogue.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Dataset CSV with a header row and an optional trailing `label` column.
    #[arg(long)]
    pub data: PathBuf,
    /// builtin:logistic | builtin:mlp | saved:<model.json> | adapter:<command>
    #[arg(long, default_value = "builtin:logistic")]
    pub model: String,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    /// Hidden width of the built-in MLP.
    #[arg(long, default_value_t = 16)]
    pub hidden: usize,
    /// Mini-batch size of the built-in MLP.
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; the model is written to `model.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Redundancy threshold.
    #[arg(long, default_value_t = bishap::graph::DEFAULT_GAMMA)]
    pub gamma: f64,
    /// PageRank damping.
    #[arg(long, default_value_t = bishap::graph::DEFAULT_DAMPING)]
    pub damping: f64,
    /// Teleport proportional to |phi| in the redundancy ranking.
    #[arg(long)]
    pub personalize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// exact | sampling | kernel
    #[arg(long, default_value = "sampling")]
    pub method: String,
    /// Permutations per feature (sampling) or coalition draws (kernel).
    #[arg(long)]
    pub samples: Option<usize>,
    /// zero | mean | fixed:<v1,v2,...> | refs:<csv>
    #[arg(long, default_value = "zero")]
    pub baseline: String,
    /// Reference rows averaged per coalition with a `refs:` baseline.
    #[arg(long, default_value_t = 1)]
    pub references: usize,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads over instances.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Explain at most this many instances, in dataset order.
    #[arg(long, default_value_t = 500)]
    pub limit: usize,
    /// Skip instances whose record already exists.
    #[arg(long)]
    pub resume: bool,
    /// Store wall-clock time per record; output is then not reproducible.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Directory of explanation records.
    #[arg(long)]
    pub records: PathBuf,
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Dataset whose labels group records for the averaged global graphs.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long, default_value = "zero")]
    pub baseline: String,
    /// Mask fractions for the mutual-redundancy curve.
    #[arg(long, default_value = "0,0.2,0.4,0.6,0.8,1")]
    pub fractions: String,
    #[arg(long, default_value_t = bishap::eval::DEFAULT_TRIALS)]
    pub trials: usize,
    /// Random rankings averaged as the AUC reference.
    #[arg(long, default_value_t = 20)]
    pub random_rankings: usize,
    /// Compare masked predictions with dataset labels instead of the
    /// unmasked predictions.
    #[arg(long)]
    pub label_reference: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long, default_value = "zero")]
    pub baseline: String,
    /// Strictly increasing thresholds.
    #[arg(long, default_value = "0,1e-8,1e-7,1e-6,1e-5,1e-4,1e-3,1e-2,1e-1,1")]
    pub gammas: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Half-open range of game seeds, `a..b`.
    #[arg(long, default_value = "0..100")]
    pub seed_range: String,
    /// Corrupt one computed value in the named check.
    #[arg(long, hide = true)]
    pub inject_fault: Option<String>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Train(a) => commands::train(a),
        Command::Explain(a) => commands::explain(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Evaluate(a) => evaluate::evaluate(a),
        Command::SweepGamma(a) => evaluate::sweep_gamma(a),
        Command::Verify(a) => verify::run_verify(a),
    }
}
