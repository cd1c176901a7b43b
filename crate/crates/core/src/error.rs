use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    #[error("{0} is not a prime in the supported range")]
    NotPrime(u64),
    #[error("insufficient precision: need {needed}, have {have}")]
    InsufficientPrecision { needed: String, have: String },
    #[error("substitution diverges: inner series must have positive known valuation")]
    SubstitutionDiverges,
    #[error("not a unit of Z_p (leading digit is zero)")]
    NotAUnit,
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("table too short: need {needed} values, have {have}")]
    TableTooShort { needed: usize, have: usize },
    #[error("too few uncensored points to fit a profile")]
    TooFewPoints,
    #[error("tower is not psi-compatible at index {index}")]
    NotPsiCompatible { index: usize },
    #[error("not in the commutant: {0}")]
    NotCommutant(String),
    #[error("matrix is not invertible over E: {0}")]
    NotInvertible(String),
    #[error("r precondition failed: {0}")]
    RPreconditionFailed(String),
    #[error("no cocycle value for group element with coordinate {0}")]
    MissingSample(String),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn mismatch(what: impl Into<String>) -> Error {
    Error::ContextMismatch(what.into())
}
