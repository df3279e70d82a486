use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("exact integer overflow in {0}")]
    Overflow(&'static str),

    #[error("backend unavailable: {0}")]
    Unavailable(String),

    #[error("malformed scheme: {0}")]
    MalformedScheme(String),

    #[error("scheme parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid size {n}: {reason}")]
    InvalidSize { n: u64, reason: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("search budget exhausted after {0} subspaces")]
    BudgetExhausted(u64),
}

pub type Result<T> = std::result::Result<T, Error>;
