use thiserror::Error;

/// Failures raised by the library. Negative verdicts are never errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("characteristic number c_{l} vanishes at n = {n}; the map is not injective")]
    Singular { n: usize, l: usize },
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
