use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Inputs outside the documented domain (bad sites, non-Hermitian input, wrong α range, …).
    #[error("domain error: {0}")]
    Domain(String),
    /// Requested problem exceeds the dense-simulation budget.
    #[error("resource limit: {0}")]
    Resource(String),
    /// A numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A fit had too few points or a degenerate design.
    #[error("fit error: {0}")]
    Fit(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
