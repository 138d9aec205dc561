use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the accepted domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch in {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    /// An exponent of the maximum-entropy form exceeded the allowed cap.
    #[error("exponent {exponent} at node {node} exceeds the cap {cap}")]
    Range {
        node: usize,
        exponent: f64,
        cap: f64,
    },

    /// The dual objective became non-finite even after safeguarding.
    #[error("non-finite dual objective at iteration {iteration} (last finite objective {last_objective})")]
    NonFinite {
        iteration: usize,
        last_objective: f64,
        lambda: Vec<f64>,
    },

    #[error("malformed {what}: {message}")]
    Malformed { what: &'static str, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(message: impl Into<String>) -> Result<T> {
    Err(Error::Domain(message.into()))
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            what,
            expected,
            found,
        })
    }
}
