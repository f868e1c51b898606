use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid parameters, detected before any work starts.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: &'static str, message: String },

    /// An integrand produced a non-finite value.
    #[error("non-finite value at quadrature node {node}: {value}")]
    Evaluation { node: usize, value: f64 },

    /// A point outside the domain of a map (e.g. projecting the origin).
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested operation is not defined for this kind of object.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The iterative linear solver did not reach its tolerance.
    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    /// Reading a config or writing a report failed.
    #[error("I/O error at {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err<T>(field: &'static str, message: impl Into<String>) -> Result<T> {
    Err(Error::Config {
        field,
        message: message.into(),
    })
}
