use std::fmt;

use crate::analyzer::{resolve_context, AnalysisRecord, Analyzer};
use crate::cst::{NodeKind, ParsedFile, SourceLanguage, SyntaxNode};
use crate::error::AnalyzerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RangeKind {
    DotDot,
    Until,
    RangeTo,
    DownTo,
}

impl RangeKind {
    pub const ALL: [RangeKind; 4] = [RangeKind::DotDot, RangeKind::Until, RangeKind::RangeTo, RangeKind::DownTo];

    pub fn as_str(self) -> &'static str {
        match self {
            RangeKind::DotDot => "DOTDOT",
            RangeKind::Until => "UNTIL",
            RangeKind::RangeTo => "RANGE_TO",
            RangeKind::DownTo => "DOWN_TO",
        }
    }
}

impl fmt::Display for RangeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Range declaration form of a node, if it is one.
pub fn range_kind(node: SyntaxNode<'_>) -> Option<RangeKind> {
    match (node.kind(), node.aux()?) {
        (NodeKind::BINARY_EXPR, "..") => Some(RangeKind::DotDot),
        (NodeKind::INFIX_CALL, "until") => Some(RangeKind::Until),
        (NodeKind::INFIX_CALL | NodeKind::MEMBER_CALL, "downTo") => Some(RangeKind::DownTo),
        (NodeKind::MEMBER_CALL, "rangeTo") => Some(RangeKind::RangeTo),
        _ => None,
    }
}

/// Kotlin range declarations with the construct they appear in.
///
/// Detection is syntactic: a user-defined infix `until` counts too.
#[derive(Debug, Default, Clone, Copy)]
pub struct KotlinRanges;

impl Analyzer for KotlinRanges {
    fn id(&self) -> &str {
        "kotlin_ranges"
    }

    fn languages(&self) -> &[SourceLanguage] {
        &[SourceLanguage::Kotlin]
    }

    fn columns(&self) -> &[&str] {
        &["range_kind", "context_kind"]
    }

    fn extract(&self, file: &ParsedFile, project_id: &str) -> Result<Vec<AnalysisRecord>, AnalyzerError> {
        Ok(file
            .root()
            .preorder()
            .filter_map(|n| {
                let kind = range_kind(n)?;
                let context = resolve_context(n);
                Some(AnalysisRecord::new(
                    self.id(),
                    project_id,
                    file,
                    n.line(),
                    vec![kind.as_str().into(), context.as_str().into()],
                ))
            })
            .collect())
    }
}
