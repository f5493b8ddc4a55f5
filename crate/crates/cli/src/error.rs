use sqkd_core::Error;

/// Runner failures, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    InsufficientData(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("{0}")]
    Model(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::InsufficientData(_) => 3,
            CliError::Io(_) => 4,
            CliError::Model(_) => 1,
        }
    }

    /// For errors raised while validating user input.
    pub fn from_core_as_config(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) => CliError::Config(m),
            other => other.into(),
        }
    }

    pub fn io(context: impl std::fmt::Display, e: std::io::Error) -> Self {
        CliError::Io(format!("{context}: {e}"))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InsufficientData { .. } => CliError::InsufficientData(e.to_string()),
            Error::Io(io) => CliError::Io(io.to_string()),
            Error::InvalidArgument(_) | Error::PhysicalityViolation { .. } | Error::Serde(_) => {
                CliError::Model(e.to_string())
            }
        }
    }
}
