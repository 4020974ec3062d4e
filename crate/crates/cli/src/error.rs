use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Core {
        stage: &'static str,
        #[source]
        source: wavetomo_core::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("incompatible runs: {0}")]
    IncompatibleRuns(String),

    #[error("image: {0}")]
    Image(#[from] image::ImageError),

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn core(stage: &'static str) -> impl FnOnce(wavetomo_core::Error) -> CliError {
        move |source| CliError::Core { stage, source }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// 2 for configurations rejected before any compute, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use wavetomo_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Parse { .. } => 2,
            CliError::Core { stage: "validate", .. } => 2,
            CliError::Core { source, .. } => match source {
                E::InvalidGrid(_) | E::CflViolation { .. } | E::InadmissibleGeometry { .. } | E::InvalidConfig(_) => 2,
                _ => 1,
            },
            _ => 1,
        }
    }

    pub fn stage(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Parse { .. } => "config",
            CliError::Core { stage, .. } => stage,
            CliError::Io { .. } | CliError::Image(_) => "output",
            CliError::IncompatibleRuns(_) => "compare",
            CliError::ThreadPool(_) => "setup",
        }
    }
}
