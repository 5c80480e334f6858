use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("arity mismatch: {left} vs {right} generators")]
    ArityMismatch { left: usize, right: usize },
    #[error("truncation order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("not a recognized unit: {0}")]
    NotAUnit(String),
    #[error("assignment is missing generator {0}")]
    MissingGenerator(String),
    #[error("derivation needs input order at least {needed}, got {got}")]
    InsufficientOrder { needed: usize, got: usize },
    #[error("t-adic precision exhausted")]
    PrecisionExhausted,
    #[error("s-degree {degree} exceeds bound {bound}")]
    DegreeBound { degree: i64, bound: i64 },
    #[error("substitution is not invertible: {0}")]
    NotInvertible(String),
    #[error("{0}")]
    Precondition(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;
