use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::cst::NodeKind;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CstError {
    #[error("span {start}..{end} exceeds file length {len}")]
    SpanOutOfBounds { start: usize, end: usize, len: usize },
    #[error("span {start}..{end} does not fall on character boundaries")]
    NotCharBoundary { start: usize, end: usize },
    #[error("malformed tree: {0}")]
    Malformed(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("{0} is not an expression node")]
    NotAnExpression(NodeKind),
}

/// Failure reported by an analyzer's `extract`.
#[derive(Debug, Error)]
#[error("{message}")]
pub struct AnalyzerError {
    pub message: String,
}

impl AnalyzerError {
    pub fn new(message: impl Into<String>) -> Self {
        AnalyzerError { message: message.into() }
    }
}

impl From<CstError> for AnalyzerError {
    fn from(e: CstError) -> Self {
        AnalyzerError::new(e.to_string())
    }
}

impl From<EvalError> for AnalyzerError {
    fn from(e: EvalError) -> Self {
        AnalyzerError::new(e.to_string())
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read project list {path}: {source}")]
    ReadList { path: PathBuf, source: io::Error },
    #[error("batch size must be at least 1")]
    ZeroBatchSize,
    #[error("project directory {0} does not exist")]
    MissingLocal(PathBuf),
    #[error("clone of {url} failed: {reason}")]
    Clone { url: String, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("unknown analyzer `{id}` (available: {available})")]
    UnknownAnalyzer { id: String, available: String },
    #[error("no analyzers selected")]
    NoAnalyzers,
    #[error("cannot resume: {0}")]
    ResumeMismatch(String),
    #[error("input {0} is neither a project list file nor a corpus directory")]
    BadInput(PathBuf),
    #[error("no completed batch directories under {0}")]
    NothingToMerge(PathBuf),
    #[error("malformed batch output {path}: {reason}")]
    BadBatchOutput { path: PathBuf, reason: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown column `{column}` (available: {})", available.join(", "))]
    UnknownColumn { column: String, available: Vec<String> },
    #[error("no group-by columns given")]
    NoGroupColumns,
    #[error("cannot chart an empty table")]
    EmptyTable,
    #[error("charts support one or two group keys, got {0}")]
    TooManyKeys(usize),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("analyzer id `{0}` must match [a-z0-9_]+")]
    InvalidId(String),
    #[error("analyzer `{0}` is already registered")]
    Duplicate(String),
}
