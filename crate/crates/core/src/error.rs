use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("inconsistent simplicial complex: {0}")]
    InconsistentComplex(String),

    #[error("diagram degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: u8, right: u8 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("need at least {needed} leaves, got {got}")]
    InsufficientLeaves { needed: usize, got: usize },

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("degenerate correlation: rank vector is constant")]
    DegenerateCorrelation,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
