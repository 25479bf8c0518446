use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] veob::Error),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 2 parameter, 3 data/format, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(veob::Error::Parameter(_)) | CliError::Usage(_) => 2,
            CliError::Core(veob::Error::Data(_)) | CliError::Format(_) | CliError::Io(_) => 3,
            CliError::Core(veob::Error::Numeric(_)) => 4,
        }
    }
}
