use thiserror::Error;

/// Errors raised by the library. Every variant names the module that raised it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("{module}: domain error: {msg}")]
    Domain { module: &'static str, msg: String },
    /// A documented precondition (admissibility, convergence gate) fails.
    #[error("{module}: precondition violated: {msg}")]
    Precondition { module: &'static str, msg: String },
    /// A series or quadrature did not reach the requested tolerance.
    #[error("{module}: no convergence: {msg}")]
    NonConvergence { module: &'static str, msg: String },
    /// Malformed input such as a matrix that is not a correlation matrix.
    #[error("{module}: {msg}")]
    BadInput { module: &'static str, msg: String },
}

impl Error {
    pub(crate) fn domain(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { module, msg: msg.into() }
    }

    pub(crate) fn precondition(module: &'static str, msg: impl Into<String>) -> Self {
        Error::Precondition { module, msg: msg.into() }
    }

    pub(crate) fn no_convergence(module: &'static str, msg: impl Into<String>) -> Self {
        Error::NonConvergence { module, msg: msg.into() }
    }

    pub(crate) fn bad_input(module: &'static str, msg: impl Into<String>) -> Self {
        Error::BadInput { module, msg: msg.into() }
    }

    /// Name of the module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Domain { module, .. }
            | Error::Precondition { module, .. }
            | Error::NonConvergence { module, .. }
            | Error::BadInput { module, .. } => module,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
