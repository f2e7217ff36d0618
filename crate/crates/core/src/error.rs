use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("insufficient history: need {needed} deviations, got {got}")]
    InsufficientHistory { needed: usize, got: usize },

    #[error("insufficient sample: need at least {needed} observations, got {got}")]
    InsufficientSample { needed: usize, got: usize },

    #[error("degenerate sample: zero variance")]
    DegenerateSample,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("empty input")]
    Empty,

    #[error("herding needs at least two strategies, got {0}")]
    NothingToImitate(usize),

    #[error("invalid break spec: {0}")]
    InvalidBreak(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {msg}")]
    Malformed { line: u64, msg: String },

    #[error("duplicate observation for {ticker} on {date}")]
    Duplicate { ticker: String, date: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
