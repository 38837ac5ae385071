use ndweak_core::Error as CoreError;
use thiserror::Error;

/// Failures of a CLI invocation, each with its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Parse(String),

    #[error("parameter out of range: {0}")]
    Range(String),

    #[error("numerical consistency failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Range(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::DimensionMismatch { .. } => CliError::Parse(msg),
            CoreError::InvalidState(_)
            | CoreError::InvalidParameter(_)
            | CoreError::EmptyPostselection
            | CoreError::PostselectionImpossible(_)
            | CoreError::ConditioningOnNull { .. }
            | CoreError::Nopps { .. } => CliError::Range(msg),
            CoreError::NonFinite(_)
            | CoreError::Quadrature { .. }
            | CoreError::OffGrid(_)
            | CoreError::Consistency(_) => CliError::Numerical(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
