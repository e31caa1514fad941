use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] spatial_sde_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}, column `{column}`: {message}")]
    Field {
        line: u64,
        column: String,
        message: String,
    },
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: duplicate coordinate ({x}, {y}), first seen on line {first}")]
    DuplicateRow { line: u64, first: u64, x: i32, y: i32 },
    #[error("plan does not match dataset: {0}")]
    PlanMismatch(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable tag for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Core(_) => "invalid-input",
            Error::Io { .. } => "io",
            Error::Csv(_) | Error::Field { .. } | Error::MissingColumn(_) | Error::DuplicateRow { .. } => "csv",
            Error::PlanMismatch(_) => "plan-mismatch",
            Error::Manifest(_) => "manifest",
            Error::Usage(_) => "usage",
        }
    }
}
