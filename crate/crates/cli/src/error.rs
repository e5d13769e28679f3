use thiserror::Error;

/// A failed run, split by the process exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad config, missing inputs or a contract violation; exit code 1.
    #[error("validation error: {0}")]
    Validation(String),
    /// Non-convergence or a degenerate pipeline; exit code 2.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl From<qlsa_core::Error> for CliError {
    fn from(e: qlsa_core::Error) -> Self {
        match e {
            qlsa_core::Error::Singular { .. } | qlsa_core::Error::Degenerate(_) => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}
