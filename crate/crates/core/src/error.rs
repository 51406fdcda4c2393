use thiserror::Error;

/// Errors raised by the workbench.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("beta must be a non-integer greater than 1, got {0}")]
    IntegerBeta(String),

    #[error("insufficient precision for digit {digit}: need at least {required} bits, have {available}")]
    InsufficientPrecision {
        digit: usize,
        required: u32,
        available: u32,
    },

    #[error("symbol {symbol} out of range for alphabet of size {k}")]
    SymbolOutOfRange { symbol: u32, k: usize },

    #[error("word {0} is not admissible")]
    Inadmissible(String),

    #[error("no bridge within {max_gap} symbols (minimum required gap {required})")]
    BridgeTooLong { max_gap: usize, required: usize },

    #[error("space is not mixing")]
    NotMixing,

    #[error("horizon exceeded: requested {requested}, available {available}")]
    HorizonExceeded { requested: usize, available: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("unsupported pairing: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("generic segment failed after {retries} retries (best deviation {best:.6}, tolerance {tol:.6})")]
    GenericSegment { retries: usize, best: f64, tol: f64 },

    #[error("hyperplane avoidance failed after {0} draws")]
    HyperplaneAvoidance(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
