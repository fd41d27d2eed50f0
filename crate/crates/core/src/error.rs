use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("cube {0} does not belong to the grid")]
    CubeOutOfGrid(String),

    #[error("non-finite value at cell {cell}")]
    NonFinite { cell: usize },

    #[error("weight must be strictly positive, cell {cell} has value {value}")]
    NonPositiveWeight { cell: usize, value: f64 },

    #[error("dynamic range too large: {0}")]
    DynamicRange(String),

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("exponent ordering violated: {0}")]
    Ordering(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("space is not {side}: {detail}")]
    Convexity { side: &'static str, detail: String },

    #[error("family is not nested: {0} and {1} overlap without containment")]
    NonNested(String, String),

    #[error("algebra routes disagree: {0}")]
    AlgebraMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
