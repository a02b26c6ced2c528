use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },

    #[error("not a permutation: {0}")]
    NotPermutation(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("index out of range: {0}")]
    Index(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("codewords {first} and {second} are at distance {distance} < {required}")]
    DistanceViolation {
        first: String,
        second: String,
        distance: usize,
        required: usize,
    },

    #[error("linear program is {0}")]
    Lp(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
