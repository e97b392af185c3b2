use thiserror::Error;

/// Errors shared across the crate. Domain violations are reported as values,
/// never panics, so callers (CLI, harnesses) can map them to exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} out of supported range (2..=2^61)")]
    ModulusRange(u64),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("{0} requires an odd modulus, got p = 2")]
    OddModulusRequired(&'static str),
    #[error("inversion of zero")]
    ZeroInverse,
    #[error("division by zero polynomial")]
    ZeroPolyDivision,
    #[error("polynomial must be monic")]
    NonMonic,
    #[error("polynomial is not irreducible: {0}")]
    NotIrreducible(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("not a prime power: {0}")]
    NotPrimePower(u64),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
