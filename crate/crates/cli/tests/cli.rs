use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_usagescan"));
    c.env_remove("GITHUB_TOKEN").env("RUST_LOG", "error");
    c
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn text(o: &[u8]) -> String {
    String::from_utf8_lossy(o).into_owned()
}

fn run(c: &mut Command) -> Output {
    c.output().expect("binary runs")
}

#[test]
fn analyze_then_report() {
    let out = tempfile::tempdir().unwrap();
    let o = run(bin()
        .args(["analyze", "--input"])
        .arg(fixtures().join("kotlin_corpus"))
        .arg("--output")
        .arg(out.path())
        .args(["--analyzers", "kotlin_ranges,keyword_count", "--batch-size", "3", "--jobs", "2"]));
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(
        text(&o.stderr).contains("4 projects, 20 files analyzed, 0 failed, 2/2 batches complete"),
        "{}",
        text(&o.stderr)
    );
    let merged = out.path().join("kotlin_ranges.csv");
    assert!(merged.is_file());
    assert!(out.path().join("manifest.jsonl").is_file());

    let chart = out.path().join("ranges.svg");
    let table = out.path().join("table.csv");
    let o = run(bin()
        .args(["report", "--input"])
        .arg(&merged)
        .args(["--group-by", "range_kind,context_kind", "--chart"])
        .arg(&chart)
        .arg("--table")
        .arg(&table));
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("range_kind"));
    assert!(fs::read_to_string(&chart).unwrap().starts_with("<svg"));
    assert!(fs::read_to_string(&table).unwrap().starts_with("range_kind,context_kind,count,percent\n"));

    let o = run(bin().args(["merge", "--output"]).arg(out.path()));
    assert!(o.status.success());
    assert!(text(&o.stdout).contains("kotlin_ranges.csv: 43 rows"), "{}", text(&o.stdout));
}

#[test]
fn unknown_analyzer_lists_the_available_ones() {
    let out = tempfile::tempdir().unwrap();
    let o = run(bin()
        .args(["analyze", "--input"])
        .arg(fixtures().join("kotlin_corpus"))
        .arg("--output")
        .arg(out.path())
        .args(["--analyzers", "nope"]));
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o.stderr);
    assert!(err.contains("nope") && err.contains("kotlin_ranges") && err.contains("python_unreachable_while"), "{err}");
}

#[test]
fn unknown_report_column_lists_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a.csv");
    fs::write(&csv, "project_id,file_path,line,range_kind\n").unwrap();
    let o = run(bin().args(["report", "--input"]).arg(&csv).args(["--group-by", "kind"]));
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("project_id, file_path, line, range_kind"), "{}", text(&o.stderr));
}

#[test]
fn failed_project_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir_all(dir.path().join("ok")).unwrap();
    fs::write(dir.path().join("ok/a.py"), "while 0:\n    pass\n").unwrap();
    fs::write(dir.path().join("list.txt"), "./ok\n./missing\n").unwrap();
    let o = run(bin()
        .args(["analyze", "--input"])
        .arg(dir.path().join("list.txt"))
        .arg("--output")
        .arg(dir.path().join("out"))
        .args(["--analyzers", "python_unreachable_while"]));
    assert_eq!(o.status.code(), Some(1), "{}", text(&o.stderr));
    let rows = fs::read_to_string(dir.path().join("out/python_unreachable_while.csv")).unwrap();
    assert_eq!(rows.lines().count(), 2);
}

#[test]
fn interrupted_run_resumes() {
    let out = tempfile::tempdir().unwrap();
    let args = |extra: &[&str]| {
        let mut c = bin();
        c.args(["analyze", "--input"]).arg(fixtures().join("kotlin_corpus")).arg("--output").arg(out.path());
        c.args(["--analyzers", "kotlin_ranges", "--batch-size", "1"]).args(extra);
        c
    };
    let o = run(&mut args(&["--max-batches", "2"]));
    assert!(o.status.success());
    assert!(text(&o.stderr).contains("--resume"));
    assert!(!out.path().join("kotlin_ranges.csv").exists());
    let o = run(&mut args(&["--resume"]));
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(text(&o.stderr).contains("4/4 batches complete"));
    assert_eq!(fs::read_to_string(out.path().join("kotlin_ranges.csv")).unwrap().lines().count(), 44);
}

#[test]
fn analyzers_are_listed() {
    let o = run(bin().arg("analyzers"));
    let s = text(&o.stdout);
    assert!(s.contains("kotlin_ranges\tkotlin\trange_kind,context_kind"), "{s}");
}

/// Serves `/repos/dave/old-name` as renamed to `Eve/New-Name`; everything
/// else is 404.
fn mock_api() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request = String::new();
            reader.read_line(&mut request).unwrap();
            let mut line = String::new();
            while reader.read_line(&mut line).unwrap() > 2 {
                line.clear();
            }
            let (status, body) = if request.starts_with("GET /repos/dave/old-name ") {
                ("200 OK", r#"{"full_name":"Eve/New-Name"}"#)
            } else {
                ("404 Not Found", r#"{"message":"Not Found"}"#)
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    format!("http://{addr}")
}

#[test]
fn online_dedup_follows_renames_and_clones() {
    let dir = tempfile::tempdir().unwrap();
    let remotes = dir.path().join("remotes");
    let repo = remotes.join("dave/old-name");
    fs::create_dir_all(&repo).unwrap();
    fs::write(repo.join("Main.kt"), "val r = 1..3\n").unwrap();
    let git = |args: &[&str]| {
        let o = Command::new("git")
            .args(args)
            .current_dir(&repo)
            .env("GIT_AUTHOR_NAME", "t")
            .env("GIT_AUTHOR_EMAIL", "t@example.com")
            .env("GIT_COMMITTER_NAME", "t")
            .env("GIT_COMMITTER_EMAIL", "t@example.com")
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", text(&o.stderr));
    };
    git(&["init", "-q"]);
    git(&["add", "."]);
    git(&["commit", "-q", "-m", "init"]);

    fs::write(dir.path().join("list.txt"), "dave/old-name\neve/new-name\n").unwrap();
    let o = run(bin()
        .args(["analyze", "--input"])
        .arg(dir.path().join("list.txt"))
        .arg("--output")
        .arg(dir.path().join("out"))
        .args(["--analyzers", "kotlin_ranges", "--online-dedup"])
        .env("USAGESCAN_GITHUB_API", mock_api())
        .env("GIT_CONFIG_COUNT", "1")
        .env("GIT_CONFIG_KEY_0", format!("url.file://{}/.insteadOf", remotes.display()))
        .env("GIT_CONFIG_VALUE_0", "https://github.com/"));
    assert!(o.status.success(), "{}", text(&o.stderr));
    let manifest = fs::read_to_string(dir.path().join("out/manifest.jsonl")).unwrap();
    assert_eq!(manifest.lines().count(), 1);
    assert!(manifest.contains(r#""project_id":"github.com__eve__new-name""#), "{manifest}");
    let rows = fs::read_to_string(dir.path().join("out/kotlin_ranges.csv")).unwrap();
    assert_eq!(
        rows,
        "project_id,file_path,line,range_kind,context_kind\ngithub.com__eve__new-name,Main.kt,1,DOTDOT,TOP_LEVEL\n"
    );
}
