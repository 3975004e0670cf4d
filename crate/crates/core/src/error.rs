use thiserror::Error;

pub type Result<T> = std::result::Result<T, JmError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JmError {
    #[error("number of measurements {n} outside supported range [{min}, {max}]")]
    MeasurementCount { n: usize, min: usize, max: usize },

    #[error("index {index} outside [1, {n}]")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("outcome entries must be +1 or -1, found {0}")]
    InvalidOutcome(i64),

    #[error("observable {index} is not a valid binary qubit measurement: {reason}")]
    InvalidObservable { index: usize, reason: String },

    #[error("assemblage has no observables")]
    EmptyAssemblage,

    #[error("observable {index} has nonzero bias {bias}; construction requires unbiased input")]
    Biased { index: usize, bias: f64 },

    #[error("state assemblage is inconsistent: outcome sums deviate by {deviation:e}")]
    InconsistentStates { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
