//! Error taxonomy shared by the whole engine.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invariant factor chain violated: {prev} does not divide {next}")]
    DivisibilityChainViolation { prev: u64, next: u64 },

    #[error("invariant factor {factor} is smaller than 2")]
    FactorTooSmall { factor: u64 },

    #[error("elements belong to different groups (arity {left} vs {right})")]
    GroupMismatch { left: usize, right: usize },

    #[error("group of order {order} exceeds the configured cap of {cap}")]
    GroupTooLarge { order: u128, cap: u128 },

    #[error("sequence of length {len} exceeds the configured cap of {cap}")]
    SequenceTooLong { len: u64, cap: u64 },

    #[error("search budget of {budget} nodes exhausted")]
    BudgetExceeded { budget: u64 },

    #[error("vector arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("instance too large for exhaustive coefficient search")]
    InstanceTooLarge,

    #[error("sequence is not an atom")]
    NotAnAtom,

    #[error("multiplicity {multiplicity} is not divisible by {divisor}")]
    MultiplicityNotDivisible { multiplicity: u32, divisor: u32 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("support rejected: {0}")]
    InvalidSupport(String),
}

pub type Result<T> = std::result::Result<T, Error>;
