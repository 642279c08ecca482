use thiserror::Error;

/// Errors raised across the planning and simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpeError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("Hamiltonian has no terms with a non-zero coefficient")]
    EmptyHamiltonian,

    #[error("{what}: requested {requested}, maximum supported is {max}")]
    Capacity {
        what: &'static str,
        requested: usize,
        max: usize,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("outcome l = {l} has probability {probability:e}; post-measurement state undefined")]
    MeasureZero { l: usize, probability: f64 },
}

pub type Result<T> = std::result::Result<T, QpeError>;
