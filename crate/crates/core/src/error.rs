use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("no input-output path")]
    NoPath,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("malformed feature vector: {0}")]
    MalformedFeatures(String),
    #[error("not realizable in spec: {0}")]
    NotRealizable(String),
    #[error("space too large to enumerate: {0}")]
    SpaceTooLarge(String),
    #[error("rejection ceiling exceeded: {0}")]
    RejectionCeiling(String),
    #[error("acceptance probability too low: no valid draw in {0} attempts")]
    AcceptanceTooLow(u64),
    #[error("no paths observed in Monte Carlo sample")]
    NoPathsObserved,
    #[error("singular kernel matrix after jitter escalation")]
    SingularKernel,
    #[error("unknown architecture: {0}")]
    UnknownArchitecture(String),
    #[error("benchmark/spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate record with conflicting values at line {line}: {key}")]
    DuplicateRecord { line: usize, key: String },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
