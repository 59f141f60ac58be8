use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what}: requested {requested}, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("table is not a bijection: value {value:#x} appears more than once")]
    NotBijective { value: u32 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid Goursat data: {0}")]
    InvalidGoursat(String),

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: i64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
