use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("kraus set is not complete: max deviation from identity {deviation:.3e}")]
    Completeness { deviation: f64 },

    #[error("outcome {index} is impossible (probability {probability:.3e})")]
    ImpossibleOutcome { index: usize, probability: f64 },

    #[error("outcome {index} has {effects} effects; pure-state collapse needs exactly one")]
    UnsupportedForPureState { index: usize, effects: usize },

    #[error("probability ratio undefined: {0}")]
    UndefinedRatio(String),

    #[error("configuration error in `{field}`: {message}")]
    Configuration { field: String, message: String },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Configuration {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn arg(message: impl Into<String>) -> Self {
        Error::Argument(message.into())
    }
}
