use thiserror::Error;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("self-test failed: {0}")]
    SelftestFailed(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Parameter(String),
    #[error("{0}")]
    MajorityFailure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::SelftestFailed(_) => 1,
            CliError::Input(_) => 2,
            CliError::Parameter(_) => 3,
            CliError::MajorityFailure(_) => 4,
        }
    }
}

impl From<l1sketch::Error> for CliError {
    fn from(e: l1sketch::Error) -> Self {
        use l1sketch::Error as E;
        match e {
            E::BadMagic | E::UnsupportedVersion(_) | E::CorruptParams(_) => CliError::Input(e.to_string()),
            E::MajorityFailure { .. } | E::DecodeFailure | E::EstimateFailure(_) => {
                CliError::MajorityFailure(e.to_string())
            }
            _ => CliError::Parameter(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
