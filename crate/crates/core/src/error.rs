use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while reading or validating input files.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: timestamp {timestamp} is not after the previous row")]
    NonMonotonic { line: usize, timestamp: String },
    #[error("line {line}: duplicate timestamp {timestamp}")]
    Duplicate { line: usize, timestamp: String },
    #[error("line {line}: {field} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        line: usize,
        field: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("invalid site: {0}")]
    Site(String),
    #[error("date mismatch: {0} vs {1}")]
    DateMismatch(chrono::NaiveDate, chrono::NaiveDate),
    #[error("empty dataset")]
    Empty,
}

/// Errors raised by the numerical routines.
#[derive(Debug, Error, PartialEq)]
pub enum NumericError {
    #[error("clear-sky path length is zero; SIVI undefined")]
    ZeroClearSky,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("series is constant")]
    Constant,
    #[error("degenerate curve: {0}")]
    Degenerate(String),
    #[error("fit did not converge")]
    NoConvergence,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty dataset")]
    Empty,
}
