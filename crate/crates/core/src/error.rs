use thiserror::Error;

use crate::newton::NewtonTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("mesh invariant violated: {0}")]
    InvariantViolation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("linearized problem lost ellipticity at Newton iteration {iteration}: {detail}")]
    EllipticityFailure { iteration: usize, detail: String, trace: Box<NewtonTrace> },

    #[error("Newton iteration did not converge after {} iterations: {reason}", trace.len())]
    NonConvergence { reason: String, trace: Box<NewtonTrace> },

    #[error("initialization failure: {0}")]
    InitializationFailure(String),

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Newton diagnostics collected before the failure, when available.
    pub fn trace(&self) -> Option<&NewtonTrace> {
        match self {
            Error::EllipticityFailure { trace, .. } | Error::NonConvergence { trace, .. } => Some(trace),
            _ => None,
        }
    }
}
