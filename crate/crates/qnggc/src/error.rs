use std::path::PathBuf;

use qnggc_core::optimizer::RunFailure;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config: `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("config: failed to parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("optimizer `{optimizer}`, seed {seed}: {failure}")]
    Run {
        optimizer: String,
        seed: usize,
        #[source]
        failure: RunFailure,
    },
    #[error(transparent)]
    Numerical(#[from] qnggc_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BenchError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config { field: field.into(), message: message.into() }
    }

    /// 2 for configuration problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::Parse { .. } => 2,
            Self::Run { .. } | Self::Numerical(_) => 3,
            Self::Io { .. } | Self::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
