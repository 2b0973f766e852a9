use thiserror::Error;

/// Errors raised by map construction, estimation and the command-line layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot parse rational {0:?} (expected \"p/q\" or an integer)")]
    ParseRational(String),

    #[error("point {point} lies outside the domain [{lo}, {hi}]")]
    OutsideDomain {
        point: String,
        lo: String,
        hi: String,
    },

    #[error("instance too large: {what} needs {needed} but the budget is {budget}")]
    Budget {
        what: &'static str,
        needed: String,
        budget: usize,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("infeasible construction: {0}")]
    Infeasible(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("map is not affine on the requested region: {0}")]
    NotAffine(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
