use selfsim_core::Error as CoreError;

/// Failure of a CLI run, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical guard tripped: {0}")]
    Numeric(CoreError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
            Self::Io(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NegativeConvolution { .. }
            | CoreError::WindowTruncation { .. }
            | CoreError::NotNormalized { .. }
            | CoreError::GridTooCoarse(_)
            | CoreError::FrequencyOverflow(_)
            | CoreError::UndefinedDensityRatio { .. }
            | CoreError::Resolution(_)
            | CoreError::NodeOutsideSupport { .. } => Self::Numeric(e),
            other => Self::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
