use std::path::PathBuf;

use serde::Serialize;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] dpcdf_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}: cannot parse {value:?} as a number")]
    Parse { row: u64, value: String },
    #[error("row {row}: value {value} lies outside [{lo}, {hi})")]
    OutOfDomain { row: u64, value: f64, lo: f64, hi: f64 },
    #[error("row {row}: expected a single column, found {columns}")]
    Columns { row: u64, columns: usize },
    #[error("{0}: no samples")]
    EmptyInput(PathBuf),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl HarnessError {
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Core(_) => "core",
            HarnessError::Io { .. } => "io",
            HarnessError::Parse { .. } => "parse",
            HarnessError::OutOfDomain { .. } => "out_of_domain",
            HarnessError::Columns { .. } => "columns",
            HarnessError::EmptyInput(_) => "empty_input",
            HarnessError::Csv(_) => "csv",
            HarnessError::Json(_) => "json",
            HarnessError::Config(_) => "config",
        }
    }

    /// `{"error": {"kind": ..., "message": ...}}`, as printed by the CLI.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Inner<'a> {
            kind: &'a str,
            message: String,
        }
        #[derive(Serialize)]
        struct Outer<'a> {
            error: Inner<'a>,
        }
        serde_json::to_string(&Outer {
            error: Inner {
                kind: self.kind(),
                message: self.to_string(),
            },
        })
        .expect("plain strings serialize")
    }
}

pub(crate) fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
