use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, QwalkError>;

#[derive(Debug, Error)]
pub enum QwalkError {
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("noise level {0} is outside [0, 1]")]
    NoiseOutOfRange(f64),

    #[error("pure-state evolution requested with noise_p = {0}; use density evolution")]
    NoisyPureEvolution(f64),

    #[error("directed walk requires non-negative support, found amplitude at x = {0}")]
    NegativeSupport(i64),

    #[error("directed walk needs loop count n >= 2, got {0}")]
    InvalidLoopCount(u32),

    #[error("density evolution of {steps} steps exceeds cap {cap}")]
    DensityCapExceeded { steps: usize, cap: usize },

    #[error("density operator has eigenvalue {0:e} below tolerance")]
    NegativeEigenvalue(f64),

    #[error("bit commitment needs at least one step, got t = {0}")]
    StepsTooSmall(usize),

    #[error("position {x} outside [-{t}, {t}]")]
    PositionOutOfRange { x: i64, t: usize },

    #[error("rounds must be >= 1")]
    RoundsTooSmall,

    #[error("{test} needs at least {needed} bits, got {got}")]
    TooFewBits {
        test: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("block frequency test needs at least 20 blocks, got {0}")]
    InsufficientBlocks(usize),

    #[error("serial test order m = {m} invalid for {n} bits")]
    SerialOrderInvalid { m: usize, n: usize },

    #[error("malformed bit buffer: {0}")]
    MalformedBuffer(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl QwalkError {
    /// Process exit status for the CLI: 2 config, 3 verification, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            QwalkError::Verification(_) => 3,
            QwalkError::Io { .. } => 4,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        QwalkError::Io {
            path: path.into(),
            source,
        }
    }
}
