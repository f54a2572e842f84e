use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] rsketch_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Bad line in a text input file; `line` is 1-based.
    #[error("{}:{line}: {reason}", path.display())]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error("{0}")]
    Input(String),

    /// A verification suite or metric requirement failed.
    #[error("{0}")]
    Failed(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// 1 for a failed check, 2 for bad input, 3 for a malformed sketch or model file.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Failed(_) | Error::Core(rsketch_core::Error::Diverged { .. }) => 1,
            Error::Core(rsketch_core::Error::Format { .. }) => 3,
            _ => 2,
        }
    }
}
