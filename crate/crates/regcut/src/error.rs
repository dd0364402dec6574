use std::io;
use std::path::PathBuf;

use regcut_core::Error as CoreError;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Bad command-line arguments or configuration values.
    #[error("{0}")]
    Parameter(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    /// A data file that does not follow its format.
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

impl HarnessError {
    /// Process exit status: 1 for parameter errors, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parameter(_) | HarnessError::Json { .. } => 1,
            HarnessError::Core(CoreError::Parameter(_) | CoreError::Config(_) | CoreError::OracleTooLarge { .. }) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }
}

pub(crate) fn param(msg: impl Into<String>) -> HarnessError {
    HarnessError::Parameter(msg.into())
}
