use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

use crate::config::Violation;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("config has {} violation(s)", .0.len())]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Core(#[from] jagg_core::Error),
    #[error("{}: {reason}", file.display())]
    Schema { file: PathBuf, reason: String },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse(_) => "parse",
            CliError::Invalid(_) => "invalid_config",
            CliError::Core(_) => "simulation",
            CliError::Schema { .. } => "schema",
            CliError::Pool(_) => "pool",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Invalid(_) => 2,
            _ => 1,
        }
    }

    /// Machine-readable form written next to the results on failure.
    pub fn record(&self) -> serde_json::Value {
        let mut v = json!({
            "status": "error",
            "kind": self.kind(),
            "message": self.to_string(),
        });
        if let CliError::Invalid(list) = self {
            v["violations"] = json!(list);
        }
        v
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
