use thiserror::Error;
use ucc_ordering::Error as CoreError;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("fixture error: {0}")]
    Fixture(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;

impl LabError {
    /// Process exit code: 2 config, 3 fixture, 4 numerical. I/O on outputs
    /// counts as a config problem (bad output path).
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Io { .. } => 2,
            LabError::Fixture(_) => 3,
            LabError::Numerical(_) => 4,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<CoreError> for LabError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Parse { .. } | CoreError::UnsupportedReference(_) | CoreError::Io(_) => {
                LabError::Fixture(e.to_string())
            }
            CoreError::Program(_) | CoreError::InvalidGenerator(_) => LabError::Config(e.to_string()),
            _ => LabError::Numerical(e.to_string()),
        }
    }
}
