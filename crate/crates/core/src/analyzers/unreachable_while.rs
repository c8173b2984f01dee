use crate::analyzer::{AnalysisRecord, Analyzer};
use crate::cst::{NodeKind, ParsedFile, SourceLanguage};
use crate::error::AnalyzerError;
use crate::eval::{eval_bool, EvalValue};

/// Python `while` loops whose condition is constantly false, with the
/// verbatim condition and body.
#[derive(Debug, Default, Clone, Copy)]
pub struct UnreachableWhile;

impl Analyzer for UnreachableWhile {
    fn id(&self) -> &str {
        "python_unreachable_while"
    }

    fn languages(&self) -> &[SourceLanguage] {
        &[SourceLanguage::Python]
    }

    fn columns(&self) -> &[&str] {
        &["condition_text", "body_text"]
    }

    fn extract(&self, file: &ParsedFile, project_id: &str) -> Result<Vec<AnalysisRecord>, AnalyzerError> {
        let mut out = Vec::new();
        for w in file.root().descendants_of_kind(NodeKind::WHILE_STMT) {
            let mut parts = w.significant_children();
            let (Some(cond), Some(body)) = (parts.next(), parts.next()) else {
                continue;
            };
            if cond.kind() == NodeKind::BLOCK || body.kind() != NodeKind::BLOCK {
                continue;
            }
            if eval_bool(cond, file)? == EvalValue::False {
                out.push(AnalysisRecord::new(
                    self.id(),
                    project_id,
                    file,
                    w.line(),
                    vec![file.node_text(cond)?.to_string(), file.node_text(body)?.to_string()],
                ));
            }
        }
        Ok(out)
    }
}
