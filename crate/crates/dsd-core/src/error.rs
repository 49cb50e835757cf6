//! Error types for dataset ingestion, the integration engine, and reporting.

use thiserror::Error;

use crate::enduse::EndUse;

/// Errors raised while loading, validating, or transforming datasets.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("validation error at row {row}{}: {message}", year.map(|y| format!(" (year {y})")).unwrap_or_default())]
    Validation {
        row: usize,
        year: Option<i32>,
        message: String,
    },

    #[error("unit error for column '{column}': {message}")]
    Unit { column: String, message: String },

    #[error("dataset has {0} record(s); at least 2 are required")]
    TooFewRecords(usize),

    #[error("year {0} is not covered by the dataset")]
    YearOutOfRange(i32),

    #[error("record for year {year} has zero total energy across active end uses")]
    DegenerateRecord { year: i32 },
}

/// Errors raised by factor-state construction.
#[derive(Debug, Error)]
pub enum FactorError {
    #[error("active end-use set is empty")]
    EmptyActiveSet,

    #[error("total energy over active end uses is zero")]
    ZeroTotalEnergy,

    #[error("factor state invariant violated: {0}")]
    Invariant(String),
}

/// Errors raised by the integration engine.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("integration settings invalid: {0}")]
    InvalidSettings(String),

    #[error("start and end states have different active end-use sets")]
    ActiveSetMismatch,

    #[error("invalid input state: {0}")]
    InvalidState(#[from] FactorError),

    #[error("non-finite state at segment {segment}")]
    NonFinite { segment: u32 },

    #[error("singular system at segment {segment} (|det| = {det:e})")]
    Singular { segment: u32, det: f64 },

    #[error("share of {end_use} left [0, 1] at segment {segment} (value {value})")]
    ShareRange {
        segment: u32,
        end_use: EndUse,
        value: f64,
    },

    #[error("share shift declared on inactive end use {0}")]
    InactiveShift(EndUse),
}

/// Errors raised when assembling reporting shapes.
#[derive(Debug, Error)]
pub enum DecompositionError {
    #[error("interval [{from}, {to}] is empty or reversed")]
    BadInterval { from: i32, to: i32 },

    #[error("year {0} is not covered by the dataset")]
    YearOutOfRange(i32),

    #[error("stage breaks must contain at least two strictly increasing years")]
    BadBreaks,

    #[error("stage break {0} lies outside the chain coverage")]
    BreakOutOfRange(i32),

    #[error("empty stage between breaks {0} and {1}")]
    EmptyStage(i32, i32),

    #[error(transparent)]
    Dataset(#[from] DatasetError),

    #[error(transparent)]
    Engine(#[from] EngineError),

    #[error(transparent)]
    Factor(#[from] FactorError),
}

/// Errors raised by the decarbonization metrics.
#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("total emissions must be positive (got {0} MtCO2)")]
    NonpositiveEmissions(f64),

    #[error("per-floor-area scale requested but floor area is absent for year {0}")]
    FloorAreaUnavailable(i32),

    #[error("chain and dataset years are misaligned at year {0}")]
    Misaligned(i32),

    #[error("chain is empty")]
    EmptyChain,

    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
}

/// Errors raised by the verification oracles.
#[derive(Debug, Error)]
pub enum OracleError {
    #[error("toy identity supports 1..=4 factors (got {0})")]
    UnsupportedFactorCount(usize),

    #[error("toy identity start/end lengths differ ({0} vs {1})")]
    MismatchedFactors(usize, usize),

    #[error("nonpositive factor value in {place}: {value}")]
    NonpositiveFactor { place: String, value: f64 },

    #[error(transparent)]
    Engine(#[from] EngineError),
}
