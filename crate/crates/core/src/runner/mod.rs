//! Batch orchestration: project enumeration, per-batch CSV checkpoints,
//! the run manifest and the final merge.

mod manifest;
mod merge;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

pub use manifest::{read_jsonl, ProjectEntry, ProjectStatus, RunManifest};
pub use merge::{merge, MergeReport};

use crate::analyzer::{run_analyzers, AnalysisRecord, Analyzer, AnalyzerRegistry};
use crate::dataset::{self, Batch, ProjectRef, RepoLookup};
use crate::error::{DatasetError, RunError};
use crate::frontends::{decode_source, FrontendRegistry};

pub const DEFAULT_BATCH_SIZE: usize = 100;
pub const DEFAULT_IGNORE: [&str; 7] = [".git", "build", "out", "node_modules", ".gradle", "venv", "__pycache__"];
pub const FIXED_COLUMNS: [&str; 3] = ["project_id", "file_path", "line"];

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const RUN_FILE: &str = "run.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.txt";
pub const MARKER_FILE: &str = ".complete";

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Project list file or corpus directory (one project per subdirectory).
    pub input: PathBuf,
    pub output_dir: PathBuf,
    pub analyzer_ids: Vec<String>,
    pub batch_size: usize,
    pub jobs: usize,
    pub resume: bool,
    pub online_dedup: bool,
    /// Directory names skipped during file enumeration.
    pub ignore: Vec<String>,
    /// Where remote projects are cloned; `output_dir/.work` if unset.
    pub workdir: Option<PathBuf>,
    /// Stop after completing this many batches in this invocation, without
    /// merging. Used to exercise resume.
    pub max_batches: Option<usize>,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, output_dir: impl Into<PathBuf>, analyzer_ids: &[&str]) -> Self {
        RunConfig {
            input: input.into(),
            output_dir: output_dir.into(),
            analyzer_ids: analyzer_ids.iter().map(|s| s.to_string()).collect(),
            batch_size: DEFAULT_BATCH_SIZE,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            resume: false,
            online_dedup: false,
            ignore: DEFAULT_IGNORE.iter().map(|s| s.to_string()).collect(),
            workdir: None,
            max_batches: None,
        }
    }
}

/// What a resumed run must agree on with the original. `jobs` is absent on
/// purpose: it does not affect output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Fingerprint {
    input: String,
    analyzers: Vec<String>,
    batch_size: usize,
    ignore: Vec<String>,
    online_dedup: bool,
    projects: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Marker {
    batch: usize,
    projects: usize,
}

/// Runs the whole pipeline. Per-project failures are recorded in the
/// manifest; only configuration and output I/O problems are errors.
/// `lookup` is consulted only when `online_dedup` is set.
pub fn run(
    config: &RunConfig,
    registry: &AnalyzerRegistry,
    lookup: Option<&dyn RepoLookup>,
) -> Result<RunManifest, RunError> {
    let analyzers = registry.select(&config.analyzer_ids)?;
    let ids: Vec<String> = analyzers.iter().map(|a| a.id().to_string()).collect();
    if config.batch_size == 0 {
        return Err(DatasetError::ZeroBatchSize.into());
    }
    let out = &config.output_dir;
    fs::create_dir_all(out)?;

    let mut run_diags = Vec::new();
    let refs = load_refs(config, &mut run_diags)?;
    let lookup = if config.online_dedup { lookup } else { None };
    if config.online_dedup && lookup.is_none() {
        run_diags.push("online dedup requested without a lookup service; using offline identity".into());
    }
    let deduped = dataset::dedup(refs, lookup);
    run_diags.extend(deduped.diagnostics);
    for d in &run_diags {
        log::warn!("{d}");
    }
    let batches = dataset::make_batches(&deduped.refs, config.batch_size)?;

    let fingerprint = Fingerprint {
        input: config.input.display().to_string(),
        analyzers: ids.clone(),
        batch_size: config.batch_size,
        ignore: config.ignore.clone(),
        online_dedup: config.online_dedup,
        projects: deduped.refs.iter().map(|r| r.project_id.clone()).collect(),
    };
    prepare_output(out, &fingerprint, config.resume)?;
    write_lines(&out.join(DIAGNOSTICS_FILE), &run_diags)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| RunError::Io(std::io::Error::other(e)))?;
    let workdir = config.workdir.clone().unwrap_or_else(|| out.join(".work"));
    let frontends = FrontendRegistry::default();
    let ctx =
        Ctx { analyzers: &analyzers, frontends: &frontends, ignore: &config.ignore, workdir: &workdir, pool: &pool };

    let mut manifest = RunManifest { total_batches: batches.len(), ..RunManifest::default() };
    let mut processed = 0;
    for batch in &batches {
        let dir = batch_dir(out, batch.index);
        if config.resume && is_complete(&dir) {
            log::info!("batch {} already complete", batch.index);
            manifest.projects.extend(read_jsonl(&dir.join(MANIFEST_FILE))?);
            manifest.completed_batches.push(batch.index);
            continue;
        }
        if config.max_batches.is_some_and(|m| processed >= m) {
            manifest.interrupted = true;
            break;
        }
        let entries = run_batch(&ctx, batch, &ids, &dir)?;
        manifest.projects.extend(entries);
        manifest.completed_batches.push(batch.index);
        processed += 1;
    }

    if !manifest.interrupted {
        manifest::write_jsonl(&out.join(MANIFEST_FILE), &manifest.projects)?;
        let expected: Vec<(String, Vec<String>)> = analyzers
            .iter()
            .map(|a| (a.id().to_string(), a.columns().iter().map(|c| c.to_string()).collect()))
            .collect();
        merge::merge_with(out, &expected, true)?;
    }
    Ok(manifest)
}

fn load_refs(config: &RunConfig, diags: &mut Vec<String>) -> Result<Vec<ProjectRef>, RunError> {
    if config.input.is_dir() {
        Ok(dataset::refs_from_corpus_dir(&config.input, &config.ignore)?)
    } else if config.input.is_file() {
        let list = dataset::load_project_list(&config.input)?;
        diags.extend(list.diagnostics);
        Ok(list.refs)
    } else {
        Err(RunError::BadInput(config.input.clone()))
    }
}

/// Fresh runs discard earlier batch output; resumed runs require a
/// matching fingerprint.
fn prepare_output(out: &Path, fingerprint: &Fingerprint, resume: bool) -> Result<(), RunError> {
    let run_file = out.join(RUN_FILE);
    if resume && run_file.is_file() {
        let previous: Fingerprint = serde_json::from_str(&fs::read_to_string(&run_file)?)?;
        if previous != *fingerprint {
            return Err(RunError::ResumeMismatch(mismatch_reason(&previous, fingerprint)));
        }
        return Ok(());
    }
    for (_, dir) in batch_dirs(out)? {
        fs::remove_dir_all(dir)?;
    }
    let _ = fs::remove_file(out.join(MANIFEST_FILE));
    let tmp = out.join(".run.json.tmp");
    fs::write(&tmp, serde_json::to_string_pretty(fingerprint)? + "\n")?;
    fs::rename(tmp, run_file)?;
    Ok(())
}

fn mismatch_reason(a: &Fingerprint, b: &Fingerprint) -> String {
    let field = if a.input != b.input {
        "input"
    } else if a.analyzers != b.analyzers {
        "analyzers"
    } else if a.batch_size != b.batch_size {
        "batch size"
    } else if a.ignore != b.ignore {
        "ignore list"
    } else if a.online_dedup != b.online_dedup {
        "online dedup"
    } else {
        "project list"
    };
    format!("{field} differs from the interrupted run")
}

struct Ctx<'a> {
    analyzers: &'a [Arc<dyn Analyzer>],
    frontends: &'a FrontendRegistry,
    ignore: &'a [String],
    workdir: &'a Path,
    pool: &'a rayon::ThreadPool,
}

fn run_batch(ctx: &Ctx<'_>, batch: &Batch, ids: &[String], dir: &Path) -> Result<Vec<ProjectEntry>, RunError> {
    if dir.exists() {
        fs::remove_dir_all(dir)?;
    }
    fs::create_dir_all(dir)?;
    let mut writers = Vec::with_capacity(ctx.analyzers.len());
    for a in ctx.analyzers {
        let mut w = csv_writer(&dir.join(format!("{}.csv", a.id())))?;
        w.write_record(FIXED_COLUMNS.iter().copied().chain(a.columns().iter().copied()))?;
        writers.push(w);
    }
    let mut entries = Vec::with_capacity(batch.projects.len());
    let mut diags = Vec::new();
    for project in &batch.projects {
        let started = Instant::now();
        let outcome = analyze_project(ctx, project);
        let mut entry = ProjectEntry {
            project_id: project.project_id.clone(),
            batch: batch.index,
            status: ProjectStatus::Ok,
            files_analyzed: 0,
            files_skipped: 0,
            duration: 0.0,
            error: None,
        };
        match outcome {
            Err(e) => {
                log::error!("{}: {e}", project.project_id);
                diags.push(format!("{}\t\t{e}", project.project_id));
                entry.status = ProjectStatus::Failed;
                entry.error = Some(e);
            }
            Ok(files) => {
                let mut partial = false;
                for f in files {
                    match f {
                        FileOutcome::Skipped { path, reason } => {
                            entry.files_skipped += 1;
                            partial = true;
                            diags.push(format!("{}\t{path}\t{reason}", project.project_id));
                        }
                        FileOutcome::Analyzed { path, records, messages } => {
                            entry.files_analyzed += 1;
                            partial |= !messages.is_empty();
                            diags.extend(messages.into_iter().map(|m| format!("{}\t{path}\t{m}", project.project_id)));
                            for r in records {
                                let k = ids
                                    .iter()
                                    .position(|i| *i == r.analyzer_id)
                                    .expect("record from a selected analyzer");
                                let line = r.line.to_string();
                                writers[k].write_record(
                                    [r.project_id.as_str(), r.file_path.as_str(), line.as_str()]
                                        .into_iter()
                                        .chain(r.values.iter().map(String::as_str)),
                                )?;
                            }
                        }
                    }
                }
                if partial {
                    entry.status = ProjectStatus::ParsePartial;
                }
            }
        }
        entry.duration = started.elapsed().as_secs_f64();
        entries.push(entry);
    }
    for mut w in writers {
        w.flush()?;
        let buf = w.into_inner().map_err(|e| e.into_error())?;
        buf.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    }
    manifest::write_jsonl(&dir.join(MANIFEST_FILE), &entries)?;
    write_lines(&dir.join(DIAGNOSTICS_FILE), &diags)?;
    let tmp = dir.join(".complete.tmp");
    fs::write(&tmp, serde_json::to_string(&Marker { batch: batch.index, projects: entries.len() })? + "\n")?;
    fs::rename(tmp, dir.join(MARKER_FILE))?;
    Ok(entries)
}

enum FileOutcome {
    Analyzed { path: String, records: Vec<AnalysisRecord>, messages: Vec<String> },
    Skipped { path: String, reason: String },
}

fn analyze_project(ctx: &Ctx<'_>, project: &ProjectRef) -> Result<Vec<FileOutcome>, String> {
    let root = dataset::materialize(project, ctx.workdir).map_err(|e| e.to_string())?;
    let files = enumerate_files(&root, ctx.frontends, ctx.ignore)?;
    let outcomes = ctx.pool.install(|| {
        files.par_iter().map(|(abs, rel)| analyze_file(ctx, &project.project_id, abs, rel)).collect::<Vec<_>>()
    });
    Ok(outcomes)
}

/// Supported files under `root` as (absolute, relative with `/`) pairs,
/// sorted by relative path.
pub fn enumerate_files(
    root: &Path,
    frontends: &FrontendRegistry,
    ignore: &[String],
) -> Result<Vec<(PathBuf, String)>, String> {
    let mut files = Vec::new();
    let walker = WalkDir::new(root).sort_by_file_name().into_iter().filter_entry(|e| {
        e.depth() == 0 || !(e.file_type().is_dir() && ignore.iter().any(|i| e.file_name().to_str() == Some(i)))
    });
    for entry in walker {
        let entry = entry.map_err(|e| e.to_string())?;
        if !entry.file_type().is_file() || frontends.lookup(entry.path()).is_none() {
            continue;
        }
        let rel = entry.path().strip_prefix(root).expect("walk stays under root");
        let rel = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        files.push((entry.path().to_path_buf(), rel));
    }
    files.sort_by(|a, b| a.1.cmp(&b.1));
    Ok(files)
}

fn analyze_file(ctx: &Ctx<'_>, project_id: &str, abs: &Path, rel: &str) -> FileOutcome {
    let skipped = |reason: String| FileOutcome::Skipped { path: rel.to_string(), reason };
    let (_, parse) = ctx.frontends.lookup(abs).expect("enumerated files are supported");
    let bytes = match fs::read(abs) {
        Ok(b) => b,
        Err(e) => return skipped(format!("unreadable: {e}")),
    };
    let source = match decode_source(bytes) {
        Ok(s) => s,
        Err(e) => return skipped(format!("not valid UTF-8: {e}")),
    };
    let file = parse(&source, rel);
    let analysis = run_analyzers(&file, project_id, ctx.analyzers);
    let mut messages: Vec<String> = file.diagnostics.iter().map(|d| format!("parse: {d}")).collect();
    messages.extend(analysis.failures.iter().map(|f| format!("analyzer {}: {}", f.analyzer_id, f.message)));
    FileOutcome::Analyzed { path: rel.to_string(), records: analysis.records, messages }
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<fs::File>>, RunError> {
    let file = BufWriter::new(fs::File::create(path)?);
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

fn write_lines(path: &Path, lines: &[String]) -> Result<(), RunError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for l in lines {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn batch_dir(output_dir: &Path, index: usize) -> PathBuf {
    output_dir.join(format!("batch_{index}"))
}

pub fn is_complete(batch_dir: &Path) -> bool {
    batch_dir.join(MARKER_FILE).is_file()
}

/// `batch_<k>` directories under `output_dir`, by numeric k.
pub(crate) fn batch_dirs(output_dir: &Path) -> Result<Vec<(usize, PathBuf)>, RunError> {
    let mut dirs = Vec::new();
    if !output_dir.is_dir() {
        return Ok(dirs);
    }
    for entry in fs::read_dir(output_dir)? {
        let entry = entry?;
        let name = entry.file_name();
        let Some(k) = name.to_str().and_then(|n| n.strip_prefix("batch_")).and_then(|k| k.parse().ok()) else {
            continue;
        };
        if entry.file_type()?.is_dir() {
            dirs.push((k, entry.path()));
        }
    }
    dirs.sort();
    Ok(dirs)
}
