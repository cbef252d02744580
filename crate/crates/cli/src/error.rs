use pvsmooth::sizing::PrepareError;
use pvsmooth::{DataError, NumericError};

/// A failure and the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
    Numeric(anyhow::Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(e: impl Into<anyhow::Error>) -> Self {
        CliError::Data(e.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Data(e) => write!(f, "data error: {e}"),
            CliError::Numeric(e) => write!(f, "numerical error: {e}"),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.into())
    }
}

impl From<NumericError> for CliError {
    fn from(e: NumericError) -> Self {
        CliError::Numeric(e.into())
    }
}

impl From<PrepareError> for CliError {
    fn from(e: PrepareError) -> Self {
        match e {
            PrepareError::Numeric(n) => n.into(),
            other => CliError::Data(other.into()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
