use thiserror::Error;

/// Errors raised anywhere in the explanation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset has no labels")]
    UnlabeledDataset,

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    TrainingDiverged { epoch: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("model adapter protocol error: {0}")]
    AdapterProtocol(String),

    #[error("game with {d} players exceeds the limit of {max} for this operation")]
    GameTooLarge { d: usize, max: usize },

    #[error("regression system is singular (rank {rank}, need {needed}); draw more samples")]
    RegressionSingular { rank: usize, needed: usize },

    #[error("invalid interaction matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn adapter(msg: impl Into<String>) -> Self {
        Error::AdapterProtocol(msg.into())
    }
}
