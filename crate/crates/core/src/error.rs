use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// The variants group into four families that the command line maps onto
/// exit codes: configuration (2), data (3) and arithmetic/statistics (4).
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("schema error in {path}: missing required column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("lookup error: `{0}` not found")]
    Lookup(String),

    #[error("arithmetic error: {0}")]
    Arithmetic(String),

    #[error("induction error: {0}")]
    Induction(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("geometry error: {0}")]
    Geometry(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn arith(msg: impl Into<String>) -> Self {
        Error::Arithmetic(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Arithmetic(_) => 4,
            _ => 3,
        }
    }
}
