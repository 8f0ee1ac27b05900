use std::fmt;

/// Errors raised anywhere in the hypergradient library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An oracle or caller produced data of the wrong shape.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A linear system could not be solved.
    #[error("singular matrix ({which}): pivot {pivot:e} below threshold {threshold:e}")]
    Singular {
        which: String,
        pivot: f64,
        threshold: f64,
    },

    /// Non-finite values or an iteration that failed to converge.
    #[error("numerical failure: {message}")]
    Numerical {
        message: String,
        step: Option<usize>,
        last_estimate: Option<f64>,
    },

    /// A point lies outside the domain of a map (e.g. a log of zero).
    #[error("domain error: {0}")]
    Domain(String),

    /// The problem does not provide a capability the computation needs.
    #[error("capability missing: {0}")]
    Capability(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input data violates a model precondition.
    #[error("data error: {0}")]
    Data(String),

    /// Bad arguments from a caller.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn contract(msg: impl fmt::Display) -> Self {
        Error::Contract(msg.to_string())
    }

    pub(crate) fn numerical(msg: impl fmt::Display) -> Self {
        Error::Numerical {
            message: msg.to_string(),
            step: None,
            last_estimate: None,
        }
    }

    /// Rename the matrix blamed by a singular-matrix error.
    pub fn blame(self, which: &str) -> Self {
        match self {
            Error::Singular {
                pivot, threshold, ..
            } => Error::Singular {
                which: which.to_string(),
                pivot,
                threshold,
            },
            other => other,
        }
    }
}
