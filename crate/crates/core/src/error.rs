use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    Domain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("jammer emitted {weight} flips, budget is {budget}")]
    Inadmissible { weight: usize, budget: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("block length {n} too large for exact enumeration (max {max})")]
    TooLarge { n: usize, max: usize },
    #[error("typical jammer window is empty at n = {n}: {reason}; {hint}")]
    Sizing {
        n: usize,
        reason: String,
        hint: String,
    },
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            lo: 0.0,
            hi: 1.0,
        })
    }
}
