use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input is empty")]
    Empty,
    #[error("duplicate coordinate ({x}, {y})")]
    DuplicateCoordinate { x: i32, y: i32 },
    #[error("sample {index} is valid but its value is not finite")]
    NonFiniteValue { index: usize },
    #[error("sample {index} at ({x}, {y}) lies outside the declared grid")]
    OutOfBounds { index: usize, x: i32, y: i32 },
    #[error("{n} samples available, at least {min} required")]
    TooFewSamples { n: usize, min: usize },
    #[error("values have zero variance")]
    ZeroVariance,
    #[error("target sample size {target} must lie in 1..{n}")]
    InvalidSampleSize { target: usize, n: usize },
    #[error("cannot split {n} samples into {groups} groups")]
    TooFewForGroups { n: usize, groups: usize },
    #[error("SDE thresholds alpha and beta cannot both be zero")]
    ZeroThresholds,
    #[error("unknown sampling method `{0}`")]
    UnknownMethod(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix is not positive definite even with jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },
    #[error("hyperparameter fit failed on all {restarts} restarts")]
    FitFailed { restarts: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("synthetic layout infeasible: {0}")]
    InfeasibleLayout(String),
}
