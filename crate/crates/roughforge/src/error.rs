use std::path::PathBuf;

/// Failures of the front end, each mapped to a process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Kernel(#[from] roughforge_core::Error),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    /// 1 failed verification, 2 I/O, 3 validation, 4 numerical divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Kernel(roughforge_core::Error::Divergence(_)) => 4,
            CliError::Validation(_) | CliError::Kernel(_) => 3,
        }
    }
}
