use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    /// A cell that could not be read as a finite number. `row` is the 1-based
    /// data row (header excluded), `col` the 1-based column.
    #[error("cannot parse {value:?} at row {row}, column {col} ({column}) as a finite number")]
    Parse {
        row: usize,
        col: usize,
        column: String,
        value: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid experiment plan: {0}")]
    Plan(String),

    #[error("metric undefined: {0}")]
    Undefined(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI: 2 for plan validation failures,
    /// 3 for anything wrong with input data or files, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Plan(_) | Error::InvalidParameter(_) => 2,
            Error::Io { .. }
            | Error::Csv(_)
            | Error::Json(_)
            | Error::Parse { .. }
            | Error::Validation(_)
            | Error::Shape(_)
            | Error::EmptyInput(_) => 3,
            Error::Numerical(_) | Error::Undefined(_) => 1,
        }
    }
}
