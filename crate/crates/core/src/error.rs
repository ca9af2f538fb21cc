use thiserror::Error;

use crate::matrix::Matrix;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// The input violates a mathematical precondition. `witness` carries a
    /// unit vector exposing a negative eigenvalue when one is available.
    #[error("domain error: {message}")]
    Domain {
        message: String,
        witness: Option<Matrix>,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("invalid tolerances: {0}")]
    Tolerance(String),

    /// Malformed or invalid input file.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Domain {
            message: message.into(),
            witness: None,
        }
    }

    pub(crate) fn dim(message: impl Into<String>) -> Self {
        Error::Dimension(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
