use thiserror::Error;

/// Errors raised by the ranking engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("invalid constraints: {0}")]
    InvalidConstraints(String),

    #[error("infeasible constraints: {0}")]
    InfeasibleConstraints(String),

    #[error("alpha must lie in [0, 1/2], got {0}")]
    InvalidAlpha(f64),

    #[error("lower bounds over {0} groups cannot be rewritten as upper bounds")]
    UnsupportedLowerBounds(usize),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid value model: {0}")]
    InvalidValueModel(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("instance has {n} individuals, this operation is limited to {limit}")]
    InstanceTooLarge { n: usize, limit: usize },

    #[error("iteration cap of {cap} exceeded")]
    IterationCapExceeded { cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
