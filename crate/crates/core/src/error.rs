use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid family parameters: {0}")]
    InvalidFamilyParams(String),

    #[error("sequence produced an invalid value at j = {j}: {reason}")]
    InvalidSequenceValue { j: u64, reason: String },

    #[error("brute-force oracle cap exceeded: n = {n} > cap = {cap}")]
    OracleCapExceeded { n: u64, cap: u64 },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("no saddle point: {0}")]
    NoSaddle(String),

    #[error("tolerance unreachable at {bits} bits (achieved residual {achieved})")]
    PrecisionExhausted { bits: usize, achieved: String },

    #[error("extrapolation did not converge (achieved error estimate {achieved})")]
    ExtrapolationNotConverged { achieved: String },

    #[error("sequence has no declared expansive parameters (K, r, y)")]
    NotExpansive,

    #[error("closed-form asymptotics require y > 1 (got y = {0})")]
    YEqualsOne(f64),

    #[error("range mismatch: {0}")]
    RangeMismatch(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
