//! Analyzer contract, registry and single-pass execution over a file.

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cst::{NodeKind, ParsedFile, SourceLanguage, SyntaxNode};
use crate::error::{AnalyzerError, RegistryError, RunError};

/// A per-file extraction rule producing tabular records.
///
/// Implementations must not keep mutable state between calls to
/// [`Analyzer::extract`]; files may be analyzed concurrently and in any
/// order.
pub trait Analyzer: Send + Sync {
    /// Short CSV-safe token matching `[a-z0-9_]+`.
    fn id(&self) -> &str;
    fn languages(&self) -> &[SourceLanguage];
    /// Analyzer-specific column names, in record order.
    fn columns(&self) -> &[&str];
    fn extract(&self, file: &ParsedFile, project_id: &str) -> Result<Vec<AnalysisRecord>, AnalyzerError>;

    fn supports(&self, language: SourceLanguage) -> bool {
        self.languages().contains(&language)
    }
}

/// One output row.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub analyzer_id: String,
    pub project_id: String,
    /// Project-relative, `/`-separated.
    pub file_path: String,
    /// 1-based.
    pub line: usize,
    pub values: Vec<String>,
}

impl AnalysisRecord {
    pub fn new(analyzer_id: &str, project_id: &str, file: &ParsedFile, line: usize, values: Vec<String>) -> Self {
        AnalysisRecord {
            analyzer_id: analyzer_id.to_string(),
            project_id: project_id.to_string(),
            file_path: file.path.clone(),
            line,
            values,
        }
    }
}

/// An analyzer that failed on one file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzerFailure {
    pub analyzer_id: String,
    pub file_path: String,
    pub message: String,
}

impl fmt::Display for AnalyzerFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "analyzer {} failed on {}: {}", self.analyzer_id, self.file_path, self.message)
    }
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct FileAnalysis {
    pub records: Vec<AnalysisRecord>,
    pub failures: Vec<AnalyzerFailure>,
}

/// Runs every analyzer that supports the file's language over the same
/// tree. Records come out in analyzer order, then in each analyzer's own
/// order. A failing or panicking analyzer contributes no records and one
/// failure; the others are unaffected.
pub fn run_analyzers(file: &ParsedFile, project_id: &str, analyzers: &[Arc<dyn Analyzer>]) -> FileAnalysis {
    let mut out = FileAnalysis::default();
    for analyzer in analyzers.iter().filter(|a| a.supports(file.language)) {
        let result = catch_unwind(AssertUnwindSafe(|| analyzer.extract(file, project_id)));
        let outcome = match result {
            Ok(Ok(records)) => check_records(analyzer.as_ref(), records),
            Ok(Err(e)) => Err(e.message),
            Err(panic) => Err(panic_message(&panic)),
        };
        match outcome {
            Ok(records) => out.records.extend(records),
            Err(message) => out.failures.push(AnalyzerFailure {
                analyzer_id: analyzer.id().to_string(),
                file_path: file.path.clone(),
                message,
            }),
        }
    }
    out
}

fn check_records(analyzer: &dyn Analyzer, records: Vec<AnalysisRecord>) -> Result<Vec<AnalysisRecord>, String> {
    let width = analyzer.columns().len();
    for r in &records {
        if r.values.len() != width {
            return Err(format!("record has {} values, expected {width}", r.values.len()));
        }
        if r.line == 0 {
            return Err("record line must be at least 1".into());
        }
        if r.analyzer_id != analyzer.id() {
            return Err(format!("record claims analyzer id `{}`", r.analyzer_id));
        }
    }
    Ok(records)
}

fn panic_message(panic: &Box<dyn std::any::Any + Send>) -> String {
    let detail = panic
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| panic.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "non-string payload".into());
    format!("panicked: {detail}")
}

pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty() && id.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

/// Analyzers by id, in registration order.
#[derive(Clone, Default)]
pub struct AnalyzerRegistry {
    analyzers: Vec<Arc<dyn Analyzer>>,
}

impl AnalyzerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `kotlin_ranges`, `python_unreachable_while` and `keyword_count`.
    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        for a in crate::analyzers::builtins() {
            r.register(a).expect("built-in analyzer ids are valid and distinct");
        }
        r
    }

    pub fn register(&mut self, analyzer: Arc<dyn Analyzer>) -> Result<(), RegistryError> {
        let id = analyzer.id();
        if !is_valid_id(id) {
            return Err(RegistryError::InvalidId(id.to_string()));
        }
        if self.get(id).is_some() {
            return Err(RegistryError::Duplicate(id.to_string()));
        }
        self.analyzers.push(analyzer);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Arc<dyn Analyzer>> {
        self.analyzers.iter().find(|a| a.id() == id)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.analyzers.iter().map(|a| a.id()).collect()
    }

    /// Looks up `ids` in the given order, dropping repeats.
    pub fn select<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<Arc<dyn Analyzer>>, RunError> {
        if ids.is_empty() {
            return Err(RunError::NoAnalyzers);
        }
        let mut out: Vec<Arc<dyn Analyzer>> = Vec::new();
        for id in ids {
            let id = id.as_ref();
            let a = self
                .get(id)
                .ok_or_else(|| RunError::UnknownAnalyzer { id: id.to_string(), available: self.ids().join(", ") })?;
            if !out.iter().any(|o| o.id() == id) {
                out.push(Arc::clone(a));
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for AnalyzerRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.ids()).finish()
    }
}

/// Enclosing construct of a node, as found by walking its ancestors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContextKind {
    For,
    While,
    If,
    When,
    Function,
    TopLevel,
}

impl ContextKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ContextKind::For => "FOR",
            ContextKind::While => "WHILE",
            ContextKind::If => "IF",
            ContextKind::When => "WHEN",
            ContextKind::Function => "FUNCTION",
            ContextKind::TopLevel => "TOP_LEVEL",
        }
    }

    fn of(kind: NodeKind) -> Option<ContextKind> {
        match kind {
            NodeKind::FOR_STMT => Some(ContextKind::For),
            NodeKind::WHILE_STMT | NodeKind::DO_WHILE_STMT => Some(ContextKind::While),
            NodeKind::IF_STMT => Some(ContextKind::If),
            NodeKind::WHEN_STMT => Some(ContextKind::When),
            NodeKind::FUNCTION_DECL => Some(ContextKind::Function),
            _ => None,
        }
    }
}

impl fmt::Display for ContextKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Nearest enclosing construct. Lambdas are transparent.
pub fn resolve_context(node: SyntaxNode<'_>) -> ContextKind {
    node.ancestors().find_map(|a| ContextKind::of(a.kind())).unwrap_or(ContextKind::TopLevel)
}
