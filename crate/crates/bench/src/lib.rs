//! Inputs shared by the benchmarks in `benches/`.

use std::fs;
use std::path::{Path, PathBuf};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

/// (path, source) of every fixture file with the given extension.
pub fn sources(ext: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut stack = vec![fixtures()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).expect("fixture directory") {
            let path = entry.expect("fixture entry").path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == ext) {
                out.push((path.display().to_string(), fs::read_to_string(&path).expect("utf-8 fixture")));
            }
        }
    }
    out.sort();
    out
}

/// A synthetic Kotlin file of roughly `lines` lines, dense in ranges.
pub fn synthetic_kotlin(lines: usize) -> String {
    let mut s = String::with_capacity(lines * 40);
    for i in 0..lines / 4 {
        s.push_str(&format!("fun f{i}(n: Int) {{\n    for (j in 0 until n) if (j in 1..{i}) println(j.rangeTo(n))\n"));
        s.push_str("    val r = n downTo 0 // 1..2\n}\n");
    }
    s
}
