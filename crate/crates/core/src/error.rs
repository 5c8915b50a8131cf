use thiserror::Error;

pub type Result<T, E = LdpError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LdpError {
    #[error("invalid privacy budget: {0}")]
    InvalidBudget(String),

    #[error("non-finite input value at position {index}")]
    NonFiniteInput { index: usize },

    #[error("value {value} at position {index} lies outside [-1, 1]")]
    OutOfDomain { index: usize, value: f64 },

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("no root of the calibration equation within |xi| <= {limit}")]
    NoRootInBracket { limit: f64 },

    #[error("invalid q = {q}: the derived keep probability p = {p} must exceed q")]
    InvalidQ { q: f64, p: f64 },

    #[error("closed-form optimal g has a negative discriminant ({0})")]
    NegativeDiscriminant(f64),

    #[error("report set mixes protocols or shapes: {0}")]
    MixedProtocolReports(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("need at least {needed} users, have {available}")]
    InsufficientUsers { needed: usize, available: usize },

    #[error("domain too large for exhaustive enumeration: {0}")]
    DomainTooLarge(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
