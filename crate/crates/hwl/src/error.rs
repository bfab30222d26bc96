use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs outside the admissible parameter domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical gate failed (non-convergence, coarse grid, indefinite
    /// embedding).
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn numerical<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Numerical(msg.into()))
}
