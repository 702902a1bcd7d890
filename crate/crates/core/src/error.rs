use thiserror::Error;

/// Errors shared by every module of the kernel.
///
/// `NonDivisible` doubles as a verification outcome: several identities are
/// exact-divisibility claims, and the counterexample suite asserts that a
/// specific division *fails*.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum QError {
    #[error("{0} is not prime")]
    NotPrime(u32),

    #[error("exact division failed: {context}")]
    NonDivisible { context: String },

    #[error("denominator {den} is not a unit at p = {p}")]
    DenominatorNotUnit { den: String, p: u32 },

    #[error("operation is only defined for p = 2 (got p = {0})")]
    UnsupportedPrime(u32),

    #[error("truncation levels differ: {left} vs {right}")]
    LevelMismatch { left: usize, right: usize },

    #[error("divided-power index {index} exceeds degree budget {budget}")]
    BudgetExceeded { index: usize, budget: usize },

    #[error("module rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },

    #[error("not a stratification: {witness}")]
    NotAStratification { witness: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type QResult<T> = Result<T, QError>;
