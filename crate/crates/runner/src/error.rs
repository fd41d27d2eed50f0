use thiserror::Error;

pub type RunResult<T> = std::result::Result<T, RunError>;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("unknown experiment kind `{0}`")]
    UnknownExperiment(String),
    #[error("invalid config field `{field}`: {reason}")]
    InvalidField { field: String, reason: String },
    #[error("could not parse config: {0}")]
    Parse(String),
    #[error("{0}: {1}")]
    Io(String, String),
    #[error(transparent)]
    Lab(#[from] dyadic_lab::Error),
}

impl RunError {
    pub fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        RunError::InvalidField { field: field.into(), reason: reason.into() }
    }
}
