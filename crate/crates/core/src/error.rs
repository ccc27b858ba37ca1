use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument exceeds the range an exhaustive routine is allowed to handle.
    #[error("{what} = {value} is outside the supported range {min}..={max}")]
    Bound {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },
    #[error("domain error: {0}")]
    Domain(String),
    /// Exact integer arithmetic would overflow 128 bits.
    #[error("range error: {0}")]
    Range(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("compute budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_bound(what: &'static str, value: usize, min: usize, max: usize) -> Result<()> {
    if value < min || value > max {
        Err(Error::Bound {
            what,
            value,
            min,
            max,
        })
    } else {
        Ok(())
    }
}
