use thiserror::Error;

use crate::scalar::{to_f64, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{quantity} = {value} is outside its domain ({reason})")]
    Domain {
        quantity: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("internal consistency violated: {0}")]
    Inconsistent(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("diagnostics: {0}")]
    Diagnostics(String),
    #[error("scenario `{name}`: {source}")]
    Scenario {
        name: String,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain<T: Real>(quantity: &'static str, value: T, reason: &'static str) -> Self {
        Error::Domain {
            quantity,
            value: to_f64(value),
            reason,
        }
    }

    pub fn in_scenario(self, name: &str) -> Self {
        Error::Scenario {
            name: name.to_owned(),
            source: Box::new(self),
        }
    }
}

/// Rejects non-finite or non-positive values.
pub(crate) fn require_positive<T: Real>(quantity: &'static str, value: T) -> Result<T> {
    if value.is_finite() && value > T::zero() {
        Ok(value)
    } else {
        Err(Error::domain(quantity, value, "must be finite and > 0"))
    }
}

pub(crate) fn require_finite<T: Real>(quantity: &'static str, value: T) -> Result<T> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::domain(quantity, value, "must be finite"))
    }
}
