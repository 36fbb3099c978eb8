use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("index {index} out of range for dimension {d}")]
    IndexOutOfRange { index: usize, d: usize },
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("d = {0} is not prime")]
    NotPrime(usize),
    #[error("need at least {need} parties, got {got}")]
    TooFewParties { need: usize, got: usize },
    #[error("enumeration needs {needed} evaluations, budget is {budget} (raise --budget)")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown catalog id {0}")]
    UnknownId(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
