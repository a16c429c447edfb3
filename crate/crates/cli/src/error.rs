use thiserror::Error;

/// Failures mapped onto the exit-code contract.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, files or JSON: exit 2.
    #[error("{0}")]
    Input(String),
    /// The computation itself failed: exit 1.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<osclab_core::Error> for CliError {
    fn from(e: osclab_core::Error) -> Self {
        use osclab_core::Error as E;
        match e {
            E::NonFinite { .. } | E::Domain(_) => CliError::Failure(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}
