use std::fmt;

use coalition_core::Error;

/// A failure carrying the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Inconsistent or missing flags. Exit 2.
    Config(String),
    /// Unreadable or malformed input files. Exit 3.
    Data(String),
    /// The computation itself failed. Exit 4.
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::PlayerCount { .. }
            | Error::TableSize { .. }
            | Error::NonFinite { .. }
            | Error::Dimension { .. }
            | Error::Permutation(_)
            | Error::Distribution(_)
            | Error::Cycle { .. }
            | Error::WeightSystem { .. }
            | Error::Gaussian(_)
            | Error::Dataset(_) => CliError::Data(msg),
            Error::SupportTooLarge { count, .. } => {
                CliError::Config(format!("{count} orderings are too many to enumerate; use --method weber-mc"))
            }
            Error::SampleCount(_) => CliError::Config(msg),
            Error::NonPositive { .. }
            | Error::NegativeDual { .. }
            | Error::NoConvergence { .. }
            | Error::Singular { .. }
            | Error::Model(_)
            | Error::ZeroVariance => CliError::Numerical(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn config<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}
