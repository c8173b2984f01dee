//! Corpus-scale analysis of language-construct usage over concrete syntax
//! trees of Kotlin and Python sources.

pub mod analyzer;
pub mod analyzers;
pub mod cst;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod frontends;
pub mod report;
pub mod runner;

pub use analyzer::{
    resolve_context, run_analyzers, AnalysisRecord, Analyzer, AnalyzerFailure, AnalyzerRegistry, ContextKind,
    FileAnalysis,
};
pub use cst::{NodeId, NodeKind, ParsedFile, SourceLanguage, Span, SyntaxNode, SyntaxTree};
pub use dataset::{Batch, Origin, ProjectRef, RepoLookup};
pub use error::{AnalyzerError, CstError, DatasetError, EvalError, RegistryError, ReportError, RunError};
pub use eval::{eval_bool, eval_expr, EvalValue};
pub use frontends::{parse_kotlin, parse_python, FrontendRegistry};
pub use report::{emit_chart, summarize, SummaryRow, SummaryTable, Tenths};
pub use runner::{merge, run, ProjectEntry, ProjectStatus, RunConfig, RunManifest};
