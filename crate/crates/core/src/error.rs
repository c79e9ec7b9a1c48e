use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("jet degree exhausted: {op} needs degree {needed}, input has {available}")]
    DegreeExhausted {
        op: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular metric: pivot {pivot:e} in row {row} is below tolerance")]
    Singular { row: usize, pivot: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("invalid metric specification: {0}")]
    InvalidSpec(String),

    #[error("unknown builtin metric `{0}`")]
    UnknownMetric(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("operation requires dimension {expected}, got {actual}")]
    WrongDimension { expected: String, actual: usize },

    #[error("operation requires weight {expected}, got {actual}")]
    WrongWeight { expected: f64, actual: f64 },

    #[error("slot arity mismatch: {0}")]
    Arity(String),

    #[error("symmetry violation: {0}")]
    Symmetry(String),

    #[error("formula error: {0}")]
    Formula(String),
}

impl Error {
    /// True for failures caused by bad input text or parameters, as opposed to
    /// numerical failures (singular metric, exhausted degree, domain errors).
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::UnknownIdentifier(_)
                | Error::InvalidSpec(_)
                | Error::UnknownMetric(_)
                | Error::InvalidParam(_)
                | Error::WrongDimension { .. }
        )
    }
}
