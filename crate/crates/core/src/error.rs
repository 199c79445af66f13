use thiserror::Error;

/// Errors raised by the algorithms in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not a median graph: {0}")]
    NotMedian(String),
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("median closure exceeded {cap} points")]
    ClosureBudgetExceeded { cap: usize },
    #[error("window exceeded {cap} points")]
    WindowBudgetExceeded { cap: usize },
    #[error("factor kind mismatch: {0}")]
    KindMismatch(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("undecided at bound {bound}: {what}")]
    UndecidedAtBound { bound: usize, what: String },
    #[error("wall inversion present: {0}")]
    InversionPresent(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("oracle budget exceeded: {0}")]
    OracleBudgetExceeded(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
