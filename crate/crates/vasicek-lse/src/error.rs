use vasicek_core::Error;

/// Failure of a command, classified by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments or configuration; exit status 2.
    #[error("{0}")]
    Usage(String),
    /// Malformed input data or a degenerate path; exit status 3.
    #[error("{0}")]
    Data(String),
    /// Anything else; exit status 4.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Domain(_) | Error::KernelToken(_) | Error::Config(_) | Error::HorizonTooLarge(_) => {
                CliError::Usage(msg)
            }
            Error::DegeneratePath(_)
            | Error::GridMismatch
            | Error::InsufficientSamples { .. }
            | Error::TooManyFailures { .. } => CliError::Data(msg),
            Error::FactorizationFailed { .. } | Error::NegativeEigenvalue(_) | Error::QuadratureNotConverged(_) => {
                CliError::Internal(msg)
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
