use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("malformed problem file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("{field}: {source}")]
    Field { field: &'static str, source: cumrate::Error },

    #[error("problem file lacks `{0}`, which this command needs")]
    Missing(&'static str),

    #[error("{0}")]
    Core(#[from] cumrate::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}
