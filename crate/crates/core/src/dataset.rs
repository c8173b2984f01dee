//! Project lists: parsing, canonical identity, deduplication,
//! materialization on disk and batching.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Component, Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::error::DatasetError;

/// Host assumed for `owner/name` shorthand entries.
pub const DEFAULT_HOST: &str = "github.com";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    /// Clone URL.
    Remote(String),
    Local(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProjectRef {
    /// The entry as written in the list.
    pub raw: String,
    /// Lowercase identity used for deduplication, `host/owner/name` for
    /// remote projects and `local/<path>` for directories.
    pub canonical_key: String,
    pub origin: Origin,
    /// `canonical_key` made filename- and CSV-safe.
    pub project_id: String,
}

impl ProjectRef {
    fn new(raw: &str, canonical_key: String, origin: Origin) -> Self {
        let project_id = project_id_for(&canonical_key);
        ProjectRef { raw: raw.to_string(), canonical_key, origin, project_id }
    }

    pub fn local(dir: &Path, key: &str) -> Self {
        ProjectRef::new(
            &dir.display().to_string(),
            format!("local/{}", key.to_lowercase()),
            Origin::Local(dir.to_path_buf()),
        )
    }

    /// Same project under a different identity; the id follows the key.
    pub fn with_key(mut self, canonical_key: String) -> Self {
        self.project_id = project_id_for(&canonical_key);
        self.canonical_key = canonical_key;
        self
    }
}

/// `/` becomes `__`; anything outside `[a-z0-9_.-]` becomes `_`.
pub fn project_id_for(canonical_key: &str) -> String {
    let mut out = String::with_capacity(canonical_key.len());
    for c in canonical_key.chars() {
        match c {
            '/' => out.push_str("__"),
            'a'..='z' | '0'..='9' | '_' | '.' | '-' => out.push(c),
            'A'..='Z' => out.push(c.to_ascii_lowercase()),
            _ => out.push('_'),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProjectList {
    pub refs: Vec<ProjectRef>,
    pub diagnostics: Vec<String>,
}

/// Reads one entry per line; blank lines and `#` comments are skipped.
/// Relative local paths resolve against the list file's directory.
pub fn load_project_list(path: &Path) -> Result<ProjectList, DatasetError> {
    let text =
        fs::read_to_string(path).map_err(|source| DatasetError::ReadList { path: path.to_path_buf(), source })?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(parse_project_list(&text, base))
}

pub fn parse_project_list(text: &str, base: &Path) -> ProjectList {
    let mut list = ProjectList::default();
    for (i, line) in text.lines().enumerate() {
        let entry = line.trim();
        if entry.is_empty() || entry.starts_with('#') {
            continue;
        }
        match parse_entry(entry, base) {
            Ok(r) => list.refs.push(r),
            Err(msg) => list.diagnostics.push(format!("line {}: {msg}: {entry:?}", i + 1)),
        }
    }
    list
}

fn is_local_entry(entry: &str) -> bool {
    entry == "."
        || entry == ".."
        || entry.starts_with('/')
        || entry.starts_with("./")
        || entry.starts_with("../")
        || entry.starts_with('~')
}

/// Parses one list entry into a reference.
pub fn parse_entry(entry: &str, base: &Path) -> Result<ProjectRef, String> {
    let entry = entry.trim();
    if is_local_entry(entry) {
        return Ok(local_entry(entry, base));
    }
    if let Some((scheme, rest)) = entry.split_once("://") {
        if scheme.is_empty() || !scheme.chars().all(|c| c.is_ascii_alphanumeric() || "+.-".contains(c)) {
            return Err("malformed URL scheme".into());
        }
        let (authority, path) = rest.split_once('/').unwrap_or((rest, ""));
        let host = authority.rsplit('@').next().unwrap_or("");
        let host = host.split(':').next().unwrap_or("");
        let host = if host.is_empty() { scheme } else { host };
        let key = remote_key(host, path)?;
        return Ok(ProjectRef::new(entry, key, Origin::Remote(entry.to_string())));
    }
    if let Some((user_host, path)) = entry.split_once(':') {
        if let Some((_, host)) = user_host.split_once('@') {
            if !host.is_empty() && !host.contains('/') {
                let key = remote_key(host, path)?;
                return Ok(ProjectRef::new(entry, key, Origin::Remote(entry.to_string())));
            }
        }
        return Err("unrecognized entry".into());
    }
    let segments: Vec<&str> = entry.trim_end_matches('/').split('/').collect();
    let (host, path) = if segments.len() >= 3 && segments[0].contains('.') {
        (segments[0], segments[1..].join("/"))
    } else if segments.len() == 2 {
        (DEFAULT_HOST, segments.join("/"))
    } else {
        return Err("expected a URL, host/owner/name, owner/name or a local path".into());
    };
    let key = remote_key(host, &path)?;
    let url = format!("https://{}", key_url_part(host, &path));
    Ok(ProjectRef::new(entry, key, Origin::Remote(url)))
}

fn key_url_part(host: &str, path: &str) -> String {
    let path = path.trim_end_matches('/');
    format!("{host}/{path}")
}

/// `host/owner/name`, lowercased, without `.git` and trailing slashes.
fn remote_key(host: &str, path: &str) -> Result<String, String> {
    let mut path = path.trim_matches('/');
    loop {
        let trimmed = path.trim_end_matches('/');
        let trimmed = trimmed.strip_suffix(".git").unwrap_or(trimmed);
        if trimmed == path {
            break;
        }
        path = trimmed;
    }
    let segments: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
    if segments.is_empty() || host.is_empty() {
        return Err("missing repository path".into());
    }
    Ok(format!("{}/{}", host.to_lowercase(), segments.join("/").to_lowercase()))
}

fn local_entry(entry: &str, base: &Path) -> ProjectRef {
    let expanded = match entry.strip_prefix('~') {
        Some(rest) => std::env::var_os("HOME")
            .map_or_else(|| PathBuf::from(entry), |h| PathBuf::from(h).join(rest.trim_start_matches('/'))),
        None => PathBuf::from(entry),
    };
    let relative = expanded.is_relative();
    let full = normalize(&base.join(&expanded));
    let shown = if relative {
        full.strip_prefix(normalize(base)).map(Path::to_path_buf).unwrap_or_else(|_| full.clone())
    } else {
        full.clone()
    };
    let key_path: Vec<String> = shown
        .components()
        .filter_map(|c| match c {
            Component::Normal(s) => Some(s.to_string_lossy().into_owned()),
            _ => None,
        })
        .collect();
    let key = if key_path.is_empty() { ".".to_string() } else { key_path.join("/") };
    ProjectRef::new(entry, format!("local/{}", key.to_lowercase()), Origin::Local(full))
}

/// Lexical normalization: drops `.` and folds `..`.
fn normalize(path: &Path) -> PathBuf {
    let mut out = PathBuf::new();
    for c in path.components() {
        match c {
            Component::CurDir => {}
            Component::ParentDir => {
                if !out.pop() {
                    out.push("..");
                }
            }
            other => out.push(other.as_os_str()),
        }
    }
    out
}

/// Every non-hidden subdirectory of `dir` is one local project, in name
/// order. Directories named in `ignore` are skipped.
pub fn refs_from_corpus_dir(dir: &Path, ignore: &[String]) -> Result<Vec<ProjectRef>, DatasetError> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if !entry.file_type()?.is_dir() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') || ignore.contains(&name) {
            continue;
        }
        names.push(name);
    }
    names.sort();
    Ok(names.into_iter().map(|n| ProjectRef::local(&dir.join(&n), &n)).collect())
}

/// Resolves a remote identity to its current one, following renames.
pub trait RepoLookup {
    /// `canonical_key` is `host/owner/name`; returns the current key in the
    /// same form (unchanged if the project was not moved).
    fn resolve(&self, canonical_key: &str) -> Result<String, String>;
}

/// Fixed redirect table; keys missing from the table resolve to
/// themselves.
#[derive(Debug, Clone, Default)]
pub struct MapLookup {
    pub redirects: HashMap<String, String>,
    /// Keys whose lookup fails.
    pub failing: HashSet<String>,
}

impl RepoLookup for MapLookup {
    fn resolve(&self, key: &str) -> Result<String, String> {
        if self.failing.contains(key) {
            return Err(format!("lookup of {key} failed"));
        }
        Ok(self.redirects.get(key).cloned().unwrap_or_else(|| key.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Deduped {
    pub refs: Vec<ProjectRef>,
    pub diagnostics: Vec<String>,
}

/// Keeps the first reference per canonical key, in input order. With a
/// lookup, remote keys are first replaced by their resolved identity; a
/// failed lookup keeps the offline key and adds a diagnostic.
pub fn dedup(refs: Vec<ProjectRef>, lookup: Option<&dyn RepoLookup>) -> Deduped {
    let mut out = Deduped::default();
    let mut seen = HashSet::new();
    for r in refs {
        let r = match (lookup, &r.origin) {
            (Some(l), Origin::Remote(_)) => match l.resolve(&r.canonical_key) {
                Ok(key) => {
                    let key = key.to_lowercase();
                    if key == r.canonical_key {
                        r
                    } else {
                        r.with_key(key)
                    }
                }
                Err(e) => {
                    out.diagnostics.push(format!("{}: {e}; keeping offline identity", r.raw));
                    r
                }
            },
            _ => r,
        };
        if seen.insert(r.canonical_key.clone()) {
            out.refs.push(r);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Batch {
    pub index: usize,
    pub projects: Vec<ProjectRef>,
}

/// Order-preserving partition into batches of `batch_size` (the last may
/// be shorter).
pub fn make_batches(refs: &[ProjectRef], batch_size: usize) -> Result<Vec<Batch>, DatasetError> {
    if batch_size == 0 {
        return Err(DatasetError::ZeroBatchSize);
    }
    Ok(refs.chunks(batch_size).enumerate().map(|(index, chunk)| Batch { index, projects: chunk.to_vec() }).collect())
}

/// Makes a project available on disk. Local projects are used in place.
/// Remote ones are shallow-cloned to `workdir/<project_id>`; a completed
/// clone is reused.
pub fn materialize(r: &ProjectRef, workdir: &Path) -> Result<PathBuf, DatasetError> {
    match &r.origin {
        Origin::Local(p) => {
            if p.is_dir() {
                Ok(p.clone())
            } else {
                Err(DatasetError::MissingLocal(p.clone()))
            }
        }
        Origin::Remote(url) => {
            let target = workdir.join(&r.project_id);
            let marker = workdir.join(format!(".{}.done", r.project_id));
            if marker.is_file() && target.is_dir() {
                return Ok(target);
            }
            fs::create_dir_all(workdir)?;
            let staging = workdir.join(format!(".{}.partial", r.project_id));
            for stale in [&staging, &target] {
                if stale.exists() {
                    fs::remove_dir_all(stale)?;
                }
            }
            let output = Command::new("git")
                .args(["clone", "--depth", "1", "--quiet", "--", url])
                .arg(&staging)
                .env("GIT_TERMINAL_PROMPT", "0")
                .output()
                .map_err(|e| DatasetError::Clone { url: url.clone(), reason: e.to_string() })?;
            if !output.status.success() {
                let _ = fs::remove_dir_all(&staging);
                return Err(DatasetError::Clone {
                    url: url.clone(),
                    reason: String::from_utf8_lossy(&output.stderr).trim().to_string(),
                });
            }
            fs::rename(&staging, &target)?;
            fs::write(&marker, b"")?;
            Ok(target)
        }
    }
}
