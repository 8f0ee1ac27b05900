use std::path::PathBuf;

use hypergrad::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, BenchError>;

/// Process exit codes of the command-line tool.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => exit::USAGE,
            BenchError::Io { .. } => exit::DATA,
            BenchError::Core(e) => match e {
                CoreError::Usage(_) | CoreError::Capability(_) => exit::USAGE,
                CoreError::Parse { .. } | CoreError::Data(_) | CoreError::Contract(_) => exit::DATA,
                CoreError::Singular { .. }
                | CoreError::Numerical { .. }
                | CoreError::Domain(_)
                | CoreError::Degenerate(_)
                | CoreError::InsufficientData(_) => exit::NUMERICAL,
            },
        }
    }
}
