use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use csv::StringRecord;

use super::{batch_dirs, csv_writer, is_complete, FIXED_COLUMNS};
use crate::error::RunError;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeReport {
    /// Analyzer id and merged data-row count, by id.
    pub analyzers: Vec<(String, usize)>,
    /// Batch directories left out for lack of a completion marker.
    pub skipped_batches: Vec<PathBuf>,
}

/// Concatenates the CSVs of all completed batches per analyzer and writes
/// `output_dir/<analyzer>.csv`, rows in canonical order.
pub fn merge(output_dir: &Path) -> Result<MergeReport, RunError> {
    merge_with(output_dir, &[], false)
}

/// `expected` analyzers get a (possibly header-only) file even if no batch
/// produced one. With `allow_empty`, having no completed batch is fine.
pub(crate) fn merge_with(
    output_dir: &Path,
    expected: &[(String, Vec<String>)],
    allow_empty: bool,
) -> Result<MergeReport, RunError> {
    let mut report = MergeReport::default();
    let mut tables: BTreeMap<String, (StringRecord, Vec<StringRecord>)> = BTreeMap::new();
    for (id, cols) in expected {
        let header: StringRecord = FIXED_COLUMNS.iter().copied().chain(cols.iter().map(String::as_str)).collect();
        tables.insert(id.clone(), (header, Vec::new()));
    }
    let mut completed = 0;
    for (_, dir) in batch_dirs(output_dir)? {
        if !is_complete(&dir) {
            log::warn!("skipping {}: no completion marker", dir.display());
            report.skipped_batches.push(dir);
            continue;
        }
        completed += 1;
        let mut files: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .collect();
        files.sort();
        for file in files {
            let id = file.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let mut reader = csv::ReaderBuilder::new().from_path(&file)?;
            let header = reader.headers()?.clone();
            if header.len() < FIXED_COLUMNS.len() || header.iter().zip(FIXED_COLUMNS).any(|(a, b)| a != b) {
                return Err(RunError::BadBatchOutput { path: file, reason: "unexpected header".into() });
            }
            let entry = tables.entry(id).or_insert_with(|| (header.clone(), Vec::new()));
            if entry.0 != header {
                return Err(RunError::BadBatchOutput {
                    path: file,
                    reason: "header differs from other batches".into(),
                });
            }
            for row in reader.records() {
                entry.1.push(row?);
            }
        }
    }
    if completed == 0 && !allow_empty {
        return Err(RunError::NothingToMerge(output_dir.to_path_buf()));
    }
    for (id, (header, mut rows)) in tables {
        rows.sort_by(canonical_order);
        let path = output_dir.join(format!("{id}.csv"));
        let tmp = output_dir.join(format!(".{id}.csv.tmp"));
        let mut w = csv_writer(&tmp)?;
        w.write_record(&header)?;
        for row in &rows {
            w.write_record(row)?;
        }
        w.flush()?;
        drop(w);
        fs::rename(&tmp, &path)?;
        report.analyzers.push((id, rows.len()));
    }
    Ok(report)
}

/// (project_id, file_path, numeric line, remaining values).
fn canonical_order(a: &StringRecord, b: &StringRecord) -> Ordering {
    let line = |r: &StringRecord| r.get(2).and_then(|l| l.parse::<u64>().ok()).unwrap_or(u64::MAX);
    a.get(0)
        .cmp(&b.get(0))
        .then_with(|| a.get(1).cmp(&b.get(1)))
        .then_with(|| line(a).cmp(&line(b)))
        .then_with(|| a.iter().skip(2).cmp(b.iter().skip(2)))
}
