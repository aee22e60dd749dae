use std::path::PathBuf;
use std::process::ExitCode;

use rainskit_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: line {line}, column {column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("solver trouble: {0}")]
    Solver(CoreError),
    #[error("property violated: {0}")]
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Input(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Violation(_) => 3,
        })
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Solver(_) | CoreError::NoConvergence | CoreError::RankDeficient { .. } => {
                CliError::Solver(e)
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
