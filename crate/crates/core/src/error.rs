use thiserror::Error;

/// Errors raised by the solvers and the noise budget.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain where the model is defined.
    #[error("domain error in `{parameter}`: {reason}")]
    Domain {
        parameter: &'static str,
        reason: String,
    },

    /// A special-function argument would overflow unscaled arithmetic.
    #[error("range error: {reason} (scale exponent {scale:.3e})")]
    Range { reason: String, scale: f64 },

    /// Two independent computation routes disagree, or an identity that must
    /// hold for an exact solution was violated.
    #[error("internal consistency failure: {0}")]
    Consistency(String),

    /// Malformed user input (configuration files, potential samples, ...).
    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn domain(parameter: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            parameter,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
