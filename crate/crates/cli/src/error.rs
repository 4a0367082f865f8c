use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid scenario: {0}")]
    Validation(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Io(_) | CliError::Failed(_) => 1,
        }
    }
}

impl From<specshare::Error> for CliError {
    fn from(e: specshare::Error) -> Self {
        match e {
            specshare::Error::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
