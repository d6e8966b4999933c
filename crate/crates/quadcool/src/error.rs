use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("cannot read `{path}`: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write `{path}`: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Numerical(#[from] quadcool_core::Error),
    #[error("{0}")]
    Analysis(String),
}

impl Error {
    /// Process exit code: 2 for bad input, 3 for numerical failure, 1 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Read { .. } => 2,
            Error::Numerical(_) | Error::Analysis(_) => 3,
            Error::Write { .. } | Error::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_error(message: impl Into<String>) -> Error {
    Error::Config(message.into())
}
