use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("domain must be non-empty")]
    EmptyDomain,

    #[error("{context}: negative entry {value} at index {index}")]
    NegativeEntry {
        context: &'static str,
        index: usize,
        value: f64,
    },

    #[error("{context}: entry at index {index} is not finite")]
    NonFiniteEntry { context: &'static str, index: usize },

    #[error("probabilities sum to {total:?}, expected 1 within {tol:?}")]
    NotNormalized { total: f64, tol: f64 },

    #[error("index {index} out of range for domain size {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("zero denominator at index {index} inside the restriction set")]
    ZeroDenominator { index: usize },

    #[error("interval [{lo}, {hi}] does not fit domain size {n}")]
    IntervalOutOfBounds { lo: usize, hi: usize, n: usize },

    #[error("invalid interval: lo {lo} exceeds hi {hi}")]
    InvertedInterval { lo: usize, hi: usize },

    #[error("intervals do not form a partition: {reason}")]
    NotAPartition { reason: String },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: u64, got: u64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "interval set mass too small: {draws} draws produced {accepted} of \
         {needed} required in-set samples"
    )]
    MassTooSmall {
        draws: u64,
        accepted: u64,
        needed: u64,
    },

    #[error(
        "scale parameters out of range (increase C relative to c): \
         polynomial tail value {value} fell below 1/2"
    )]
    ScaleInvalid { value: f64 },

    #[error("tester inconsistent: no candidate piece count accepted up to the domain size")]
    NoModelFound,
}

pub type Result<T> = std::result::Result<T, Error>;
