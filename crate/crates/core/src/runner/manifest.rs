use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectStatus {
    Ok,
    /// Analyzed, but some files had parse diagnostics, could not be
    /// decoded, or tripped an analyzer.
    ParsePartial,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectEntry {
    pub project_id: String,
    pub batch: usize,
    pub status: ProjectStatus,
    pub files_analyzed: usize,
    pub files_skipped: usize,
    /// Wall-clock seconds spent on the project.
    pub duration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunManifest {
    pub projects: Vec<ProjectEntry>,
    /// Indices of batches with completion markers.
    pub completed_batches: Vec<usize>,
    pub total_batches: usize,
    /// The run stopped before all batches were processed.
    pub interrupted: bool,
}

impl RunManifest {
    pub fn failed_count(&self) -> usize {
        self.projects.iter().filter(|p| p.status == ProjectStatus::Failed).count()
    }

    pub fn files_analyzed(&self) -> usize {
        self.projects.iter().map(|p| p.files_analyzed).sum()
    }
}

pub(crate) fn write_jsonl(path: &Path, entries: &[ProjectEntry]) -> Result<(), RunError> {
    let tmp = path.with_extension("jsonl.tmp");
    let mut w = BufWriter::new(fs::File::create(&tmp)?);
    for e in entries {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<ProjectEntry>, RunError> {
    let text = fs::read_to_string(path)?;
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| serde_json::from_str(l).map_err(RunError::from)).collect()
}
