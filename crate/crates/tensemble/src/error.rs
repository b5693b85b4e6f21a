use std::process::ExitCode;

/// Command failure, classified by exit code.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    /// Bad flags, manifest or input data (exit 2).
    #[error("{0}")]
    Config(String),
    /// Reading or writing files failed (exit 3).
    #[error("I/O error: {0}")]
    Io(String),
    /// A broken internal invariant (exit 4).
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

impl From<crate::manifest::LoadError> for CliError {
    fn from(e: crate::manifest::LoadError) -> Self {
        match e {
            crate::manifest::LoadError::Io(..) => CliError::Io(e.to_string()),
            crate::manifest::LoadError::Parse(p) => CliError::Config(p.to_string()),
        }
    }
}
