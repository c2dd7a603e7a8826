use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unit index {index} out of range for {n} units")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("support has {actual} points, exceeding the limit of {limit}")]
    SupportTooLarge { actual: u128, limit: u128 },

    #[error("exact interference detection needs n <= {limit}, got n = {n}")]
    TooLargeForExactDetection { n: usize, limit: usize },

    #[error("transport problem with {cells} cost entries exceeds the limit of {limit}")]
    ProblemTooLarge { cells: usize, limit: usize },

    #[error("power iteration did not converge within {0} iterations")]
    NotConverged(usize),

    #[error("{estimator} estimator is undefined: the {arm} arm is empty")]
    DegenerateAssignment {
        estimator: &'static str,
        arm: &'static str,
    },

    #[error("inflation factor requires graph or explicit factor ({0} missing)")]
    MissingSummaryField(&'static str),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("internal solver error: {0}")]
    Solver(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
