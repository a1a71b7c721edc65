use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("beta/delta = {ratio} is not an even integer")]
    NonIntegralRatio { ratio: f64 },

    #[error("empty spatial interval")]
    EmptyInterval,

    #[error("{0} is not a horizontal edge")]
    NotHorizontal(String),

    #[error("closure graph of {0} leaves the box")]
    OutsideBox(String),

    #[error("enumeration ceiling of {ceiling} exceeded")]
    CeilingExceeded { ceiling: usize },

    #[error("interval mismatch: {0}")]
    IntervalMismatch(String),

    #[error("boundary condition violated: {0}")]
    BoundaryViolation(String),

    #[error("too few samples: {got} (need at least {need})")]
    TooFewSamples { got: usize, need: usize },

    #[error("nonpositive partition function {0} on a polymer subset")]
    NonPositivePartition(f64),

    #[error("Hilbert space of {sites} sites exceeds the cap of {cap}")]
    DimensionCap { sites: usize, cap: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("block {0} is not contained in the chain")]
    BlockOutsideChain(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
