use std::path::PathBuf;

use polyagg::Error;

/// Exit codes: 0 success, 1 internal failure, 2 input error, 3 infeasible
/// model, 4 scale guard exceeded.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Csv(_) => 1,
            CliError::Parse { .. } | CliError::Config(_) => 2,
            CliError::Model(e) => match e.root() {
                Error::EmptyPolytope | Error::InfeasibleDispatch { .. } => 3,
                Error::OracleScale(_) => 4,
                Error::IterationLimit(_) => 1,
                _ => 2,
            },
        }
    }
}
