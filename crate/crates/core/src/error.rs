//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Incompatible rings, cutoffs or models.
    #[error("configuration error: {0}")]
    Config(String),
    /// Malformed input text or data file.
    #[error("parse error: {0}")]
    Parse(String),
    /// Wrong arity, unknown identifier or out-of-range argument.
    #[error("usage error: {0}")]
    Usage(String),
    /// A backend or model violated an invariant; each entry is a witness.
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
    /// A numerical or algebraic precondition does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
