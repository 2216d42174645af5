use geotail::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(SimError),
    #[error("verification failed at {failed} of {total} checks")]
    VerificationFailed { failed: usize, total: usize },
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 0 = pass, 1 = verification failure, 2 = config error, 3 = runtime cap.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed { .. } => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Runtime(SimError::CapExceeded { .. }) => 3,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::CapExceeded { .. } => CliError::Runtime(e),
            other => CliError::Config(other.to_string()),
        }
    }
}
