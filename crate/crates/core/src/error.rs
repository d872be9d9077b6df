use thiserror::Error;

/// Errors raised by kernel construction, spectral analysis, samplers and file I/O.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("row {row} sums to {sum} (expected 1)")]
    NonStochastic { row: usize, sum: f64 },
    #[error("need at least 2 states, got {0}")]
    TooFewStates(usize),
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("detailed balance residual {residual:e} exceeds tolerance {tol:e}")]
    NotReversible { residual: f64, tol: f64 },
    #[error("stationary probability at state {index} is {value} (must be > 0)")]
    NonPositivePi { index: usize, value: f64 },
    #[error("stationary probabilities sum to {sum} (expected 1)")]
    UnnormalizedPi { sum: f64 },
    #[error("stationary distribution is not unique ({multiplicity} invariant directions)")]
    NonUniqueStationary { multiplicity: usize },
    #[error("mixture weight {0} outside [0, 1)")]
    BadMixtureWeight(f64),
    #[error("window radius {0} too small (need N >= 2)")]
    WindowTooSmall(usize),
    #[error("x-marginal at state {0} is zero")]
    DegenerateMarginal(usize),
    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),
    #[error("zero stationary mass at state {0}")]
    ZeroPiEntry(usize),
    #[error("Jacobi iteration did not converge: residual {residual:e} after {sweeps} sweeps")]
    NoConvergence { residual: f64, sweeps: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sup of spectrum is 1; no finite variance bound")]
    LambdaAtOne,
    #[error("kernels have different stationary laws (max difference {0:e})")]
    MismatchedStationary(f64),
    #[error("ordering violated despite off-diagonal domination: {0}")]
    OrderingViolated(String),
    #[error("target weight {value} at state {index} is not positive")]
    NonPositiveTarget { index: usize, value: f64 },
    #[error("proposal row {row} sums to {sum} (> 1)")]
    RowSumExceedsOne { row: usize, sum: f64 },
    #[error("holding probability {value} at state {row} is negative")]
    NegativeHolding { row: usize, value: f64 },
    #[error("proposal scale {0} outside (0, 1]")]
    BadScale(f64),
    #[error("invalid sampler specification: {0}")]
    InvalidSpec(String),
    #[error("state {0} outside the target support")]
    InvalidState(f64),
    #[error("transform requires positive states, got {0}")]
    NonPositiveState(f64),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("trace too short: {0}")]
    TraceTooShort(String),
    #[error("invalid start state: {0}")]
    InvalidStart(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
