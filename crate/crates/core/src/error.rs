use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The instance violates a structural requirement (empty job list,
    /// unbalanced targets, zero speed, ...).
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// An argument does not fit the instance it is used with.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An exact integer computation left the supported range.
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    /// The chosen pivot cannot satisfy the size-`a` requirement on big
    /// machines, so the configuration program is not built.
    #[error("pivot {pivot} infeasible: {available} jobs of that size, {required} required on big machines")]
    PivotInfeasible {
        pivot: u64,
        available: u64,
        required: u128,
    },

    /// A proven invariant failed to hold. This always indicates a bug in an
    /// upstream stage, never bad user input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    /// A brute-force search ran out of its node budget before finishing.
    #[error("search budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
