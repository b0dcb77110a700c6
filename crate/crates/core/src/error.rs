use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("window index {index} out of range 1..={layers}")]
    WindowOutOfRange { index: usize, layers: usize },

    #[error("MCS index {0} has no transport-block capacity entry (valid: 4..=15)")]
    McsOutOfRange(u8),

    #[error("invalid layer configuration: {0}")]
    InvalidLayers(String),

    #[error("invalid transmission plan: {0}")]
    InvalidPlan(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration needs {needed} combinations, bound is {bound}")]
    EnumerationTooLarge { needed: u128, bound: u128 },

    #[error("profit-cost ratio undefined: no transport blocks allocated")]
    UndefinedRatio,

    #[error("no solution found")]
    NoSolution,

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
