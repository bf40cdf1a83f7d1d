use thiserror::Error;

/// Errors raised by the network model, enumeration and inheritance code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CrnError {
    #[error("complex has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("source and target complexes are identical")]
    TrivialReaction,
    #[error("duplicate reaction `{0}`")]
    DuplicateReaction(String),
    #[error("network must have at least one species")]
    NoSpecies,
    #[error("trivial stoichiometric subspace")]
    TrivialSubspace,
    #[error("reaction vector is not in the span of the existing reaction vectors")]
    NotInSpan,
    #[error("flow reaction conflict: {0}")]
    FlowConflict(String),
    #[error("parameter must be positive, got {0}")]
    NonPositive(f64),
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("resource guard: {labeled} labeled networks exceed ceiling {ceiling}")]
    ResourceGuard { labeled: u128, ceiling: u128 },
    #[error("invalid enumeration request: {0}")]
    InvalidSpec(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("not periodic: {0}")]
    NotPeriodic(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, CrnError>;

impl From<std::io::Error> for CrnError {
    fn from(e: std::io::Error) -> Self {
        CrnError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CrnError {
    fn from(e: serde_json::Error) -> Self {
        CrnError::Io(e.to_string())
    }
}

impl From<csv::Error> for CrnError {
    fn from(e: csv::Error) -> Self {
        CrnError::Io(e.to_string())
    }
}
