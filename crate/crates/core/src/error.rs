use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed arguments: shape mismatches, nonpositive weights, bad graph sizes.
    #[error("input error: {0}")]
    Input(String),
    /// A geometric operation left its domain of definition (log past the cut locus).
    #[error("domain error: {0}")]
    Domain(String),
    /// A state could not be constructed with the requested properties.
    #[error("construction error: {0}")]
    Construction(String),
    /// The integrator lost the manifold or hit a numerical-domain failure.
    #[error("integrator failure: {0}")]
    Integrator(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
