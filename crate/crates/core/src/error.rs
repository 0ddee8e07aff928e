use thiserror::Error;

/// Errors reported by the detectors, the signal chain and the harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlseError {
    #[error("PRBS seed must be nonzero")]
    ZeroSeed,
    #[error("length must be at least 1")]
    EmptyInput,
    #[error("bit sequence has odd length {0}")]
    OddBitCount(usize),
    #[error("coefficient count {coeffs} does not match state count {states}")]
    LengthMismatch { coeffs: usize, states: usize },
    #[error("brute-force search limited to {max} samples, got {len}")]
    OracleTooLong { len: usize, max: usize },
    #[error("block length {0} is not supported here (needs {1})")]
    InvalidBlockLength(usize, &'static str),
    #[error("span mismatch: left ends at {left_last}, right starts at {right_first}")]
    SpanMismatch { left_last: usize, right_first: usize },
    #[error("candidate set is empty")]
    EmptyCandidateSet,
    #[error("invalid state count {0} (expected 2, 3 or 4)")]
    InvalidStateCount(usize),
    #[error("pre-decisions required: {0}")]
    MissingPreDecisions(String),
    #[error("unknown detector `{0}`")]
    UnknownDetector(String),
    #[error("LMS training diverged at epoch {epoch}")]
    TrainingDiverged { epoch: usize },
    #[error("invalid FFE configuration: {0}")]
    InvalidFfe(String),
    #[error("invalid channel model: {0}")]
    InvalidChannel(String),
    #[error("cost trace mixes configurations: {0}")]
    MixedTrace(String),
    #[error("invalid configuration field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for MlseError {
    fn from(e: std::io::Error) -> Self {
        MlseError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, MlseError>;
