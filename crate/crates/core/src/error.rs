use chrono::NaiveDate;
use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty market day")]
    EmptyMarketDay,

    #[error("empty cross-section")]
    EmptyCrossSection,

    #[error("degenerate cross-section for f: m = {0}, need m >= 2")]
    DegenerateCrossSection(usize),

    #[error("duplicate symbol {0:?}")]
    DuplicateSymbol(String),

    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),

    #[error("dates are not strictly increasing at {0}")]
    NonMonotoneDates(NaiveDate),

    #[error("empty index series")]
    EmptySeries,

    #[error("insufficient data: need {needed} points, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("window length {got} too short, need at least {min}")]
    WindowTooShort { got: usize, min: usize },

    #[error("estimator {0} needs a seed bar with the previous close")]
    MissingSeed(&'static str),

    #[error("nonpositive price on {0}")]
    NonPositivePrice(NaiveDate),

    #[error("no volume in window")]
    NoVolume,

    #[error("no common dates")]
    NoCommonDates,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("undefined correlation: zero variance")]
    UndefinedCorrelation,

    #[error("zero variance in market series")]
    ZeroVariance,

    #[error("empty sample")]
    EmptySample,

    #[error("degenerate column {0}")]
    DegenerateColumn(&'static str),

    #[error("price matrix needs at least {min} symbols, have {got}")]
    TooFewSymbols { got: usize, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
