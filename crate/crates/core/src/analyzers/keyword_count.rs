use crate::analyzer::{AnalysisRecord, Analyzer};
use crate::cst::{NodeKind, ParsedFile, SourceLanguage};
use crate::error::AnalyzerError;

/// Per-file counts of selected construct kinds. Counting CST nodes means
/// keywords inside strings and comments are never counted.
#[derive(Debug, Clone)]
pub struct KeywordCount {
    kinds: Vec<NodeKind>,
}

impl KeywordCount {
    pub fn new(kinds: Vec<NodeKind>) -> Self {
        KeywordCount { kinds }
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }
}

impl Default for KeywordCount {
    fn default() -> Self {
        KeywordCount::new(vec![
            NodeKind::FOR_STMT,
            NodeKind::WHILE_STMT,
            NodeKind::IF_STMT,
            NodeKind::WHEN_STMT,
            NodeKind::FUNCTION_DECL,
        ])
    }
}

impl Analyzer for KeywordCount {
    fn id(&self) -> &str {
        "keyword_count"
    }

    fn languages(&self) -> &[SourceLanguage] {
        &[SourceLanguage::Kotlin, SourceLanguage::Python]
    }

    fn columns(&self) -> &[&str] {
        &["keyword", "count"]
    }

    /// One record per configured kind that occurs; the line is that of
    /// the first occurrence.
    fn extract(&self, file: &ParsedFile, project_id: &str) -> Result<Vec<AnalysisRecord>, AnalyzerError> {
        let mut counts = vec![(0usize, 0usize); self.kinds.len()];
        for n in file.root().preorder() {
            if let Some(i) = self.kinds.iter().position(|&k| k == n.kind()) {
                if counts[i].0 == 0 {
                    counts[i].1 = n.line();
                }
                counts[i].0 += 1;
            }
        }
        Ok(self
            .kinds
            .iter()
            .zip(counts)
            .filter(|(_, (count, _))| *count > 0)
            .map(|(kind, (count, line))| {
                AnalysisRecord::new(self.id(), project_id, file, line, vec![kind.as_str().into(), count.to_string()])
            })
            .collect())
    }
}
