use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Verification(_) => 4,
        }
    }

    /// Configuration and input-format problems are usage errors; anything
    /// raised while computing is a runtime error.
    pub fn from_core(context: &str, e: bme_core::Error) -> Self {
        use bme_core::Error as E;
        match e {
            E::InvalidConfig(_) | E::Json(_) | E::InvalidEnsemble(_) => CliError::Usage(format!("{context}: {e}")),
            other => CliError::Runtime(format!("{context}: {other}")),
        }
    }

    pub fn io(context: &str, e: std::io::Error) -> Self {
        CliError::Runtime(format!("{context}: {e}"))
    }
}
