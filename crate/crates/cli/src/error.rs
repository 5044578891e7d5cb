use dpp_gicar::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("bad config: {0}")]
    Config(String),

    #[error(transparent)]
    Library(#[from] Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    /// 1 verification failure, 2 bad config, 3 numerical or truncation failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Library(e) => match e {
                Error::Validation(_)
                | Error::EmptyDomain { .. }
                | Error::Range(_)
                | Error::Parameter(_)
                | Error::Domain(_)
                | Error::Admissibility { .. }
                | Error::Shift { .. }
                | Error::Contraction { .. }
                | Error::Ceiling { .. } => 2,
                Error::Precision { .. }
                | Error::AmbiguousProjection { .. }
                | Error::Compatibility { .. }
                | Error::Truncation { .. }
                | Error::Window(_)
                | Error::Statistics(_)
                | Error::NoConvergence => 3,
            },
        }
    }
}
