use lasso_paths::proximal::ProximalError;
use lasso_paths::Error;
use thiserror::Error as ThisError;

/// Command failures, each tied to a process exit code.
#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Failed(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("no path: {0}")]
    NotAPath(String),
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("property violation: {0}")]
    Property(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Input(_) => 2,
            CliError::NotAPath(_) => 3,
            CliError::NoConvergence(_) => 4,
            CliError::Property(_) => 5,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotAPath(_) | Error::EndpointMismatch { .. } => {
                CliError::NotAPath(e.to_string())
            }
            Error::PropertyViolation { .. } => CliError::Property(e.to_string()),
            Error::Io(msg) => CliError::Failed(msg),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<ProximalError> for CliError {
    fn from(e: ProximalError) -> Self {
        match e {
            ProximalError::Invalid(inner) => inner.into(),
            ProximalError::Linalg(_) => CliError::Failed(e.to_string()),
            ProximalError::MaxIterationsExceeded(_)
            | ProximalError::InnerSolveNotConverged { .. } => {
                CliError::NoConvergence(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}
