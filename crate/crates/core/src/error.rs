use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: String, reason: &'static str },

    #[error("p-value at index {index} is {value}, expected a finite value in [0, 1]")]
    InvalidPValue { index: usize, value: f64 },

    #[error("schedule index {ell} outside horizon {horizon}")]
    OutOfHorizon { ell: u64, horizon: u64 },

    #[error("schedule normalizer did not reach the mass tolerance: bracket width {width:e} after {terms} terms")]
    NormalizerTolerance { width: f64, terms: u64 },

    #[error("significance level equals 1, wealth update would divide by zero")]
    UnitLevel,

    #[error("need at least {needed} trials, got {got}")]
    InsufficientTrials { needed: usize, got: usize },

    #[error("relative power undefined: BH made no true discoveries in any of {trials} trials")]
    AllTrialsSkipped { trials: usize },

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch { what: &'static str, left: usize, right: usize },

    #[error("gene {index} (`{gene}`) has zero pooled variance")]
    ZeroVariance { index: usize, gene: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(name: &'static str, value: impl ToString, reason: &'static str) -> Result<T> {
    Err(Error::InvalidParameter { name, value: value.to_string(), reason })
}
