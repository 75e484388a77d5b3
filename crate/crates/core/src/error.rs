use thiserror::Error;

/// Errors raised by the library.
///
/// Numeric payloads are reported as `f64` regardless of the scalar type the
/// failing routine ran with.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: expected {expected}")]
    Parse { offset: usize, expected: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("singular time t = {t}: {reason}")]
    SingularTime { t: f64, reason: String },

    #[error("level n = {0} exceeds the supported range")]
    Overflow(usize),

    #[error("initial data not decayed at the grid edge (|psi| = {edge:e})")]
    Truncation { edge: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("context mismatch: {0}")]
    ContextMismatch(String),

    #[error("element is not invertible: {0}")]
    NotInvertible(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn singular(t: f64, reason: impl Into<String>) -> Self {
        Error::SingularTime {
            t,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
