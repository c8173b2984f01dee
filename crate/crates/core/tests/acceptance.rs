//! Runs the eight acceptance checks and prints one PASS/FAIL line each.
//! Exits nonzero if any check fails.

mod common;

use std::fmt::Write as _;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use usagescan_core::analyzer::AnalyzerRegistry;
use usagescan_core::analyzers::UnreachableWhile;
use usagescan_core::dataset::{dedup, parse_project_list, MapLookup};
use usagescan_core::report::{render_chart, summarize, summarize_reader};
use usagescan_core::runner::{self, read_jsonl, RunConfig};
use usagescan_core::{parse_python, Analyzer};

type Check = Result<String, String>;
type Named = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn evaluator_oracle() -> Check {
    let started = Instant::now();
    let stats = common::eval_oracle(1)?;
    let small = common::exprs::upto2();
    let n1 = small.iter().filter(|c| c.depth == 1).count();
    let expected = small.len() + common::exprs::depth3_count(n1, small.len() - n1);
    ensure(stats.closed + stats.open == expected, || {
        format!("checked {} of {expected} trees", stats.closed + stats.open)
    })?;
    let took = started.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!(
        "{} closed trees agree, {} open trees sound ({} decided), {:.1}s",
        stats.closed,
        stats.open,
        stats.open_decided,
        took.as_secs_f64()
    ))
}

fn unreachable_loops() -> Check {
    let src =
        fs::read_to_string(common::fixtures().join("unreachable_loops/loops/loops.py")).map_err(|e| e.to_string())?;
    let file = parse_python(&src, "loops.py");
    let recs = UnreachableWhile.extract(&file, "p").map_err(|e| e.to_string())?;
    let got: Vec<(&str, &str)> = recs.iter().map(|r| (r.values[0].as_str(), r.values[1].as_str())).collect();
    ensure(got == [("False", "f()"), ("2+2 != 4", "f()\n        x = x + 1")], || format!("reported {got:?}"))?;

    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let m = common::run_corpus(
        &common::fixtures().join("python_satisfiable"),
        out.path(),
        &["python_unreachable_while"],
        100,
        4,
    );
    let rows = common::csv_rows(&out.path().join("python_unreachable_while.csv"));
    ensure(m.files_analyzed() == 50, || format!("{} files analyzed", m.files_analyzed()))?;
    ensure(rows.is_empty(), || format!("{} false positives", rows.len()))?;
    Ok("2 dead loops reported verbatim, 0 reports on 50 satisfiable files".into())
}

fn range_oracle() -> Check {
    let corpus = common::fixtures().join("kotlin_corpus");
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let m = common::run_corpus(&corpus, out.path(), &["kotlin_ranges"], 2, 4);
    ensure(m.files_analyzed() == 20, || format!("{} files", m.files_analyzed()))?;
    let rows = common::csv_rows(&out.path().join("kotlin_ranges.csv"));
    let expected = common::range_markers(&corpus);
    ensure(rows == expected, || format!("{} rows vs {} hand-counted", rows.len(), expected.len()))?;
    let kinds = common::tally(&expected, 3);
    ensure(kinds.len() == 4 && kinds.values().all(|&n| n >= 5), || format!("kinds {kinds:?}"))?;
    let contexts = common::tally(&expected, 4);
    ensure(contexts.len() == 6, || format!("contexts {contexts:?}"))?;
    Ok(format!("{} occurrences match exactly; kinds {kinds:?}", rows.len()))
}

fn merged_bytes(out: &Path) -> Vec<Vec<u8>> {
    ["kotlin_ranges", "python_unreachable_while", "keyword_count"]
        .iter()
        .map(|id| fs::read(out.join(format!("{id}.csv"))).unwrap())
        .collect()
}

const ALL: [&str; 3] = ["kotlin_ranges", "python_unreachable_while", "keyword_count"];

fn batch_invariance() -> Check {
    let corpus = common::fixtures().join("kotlin_corpus");
    let mut reference: Option<Vec<Vec<u8>>> = None;
    for batch in [1, 3, 1000] {
        for jobs in [1, 4] {
            let out = tempfile::tempdir().map_err(|e| e.to_string())?;
            common::run_corpus(&corpus, out.path(), &ALL, batch, jobs);
            let bytes = merged_bytes(out.path());
            match &reference {
                None => reference = Some(bytes),
                Some(r) => ensure(*r == bytes, || format!("batch_size {batch} jobs {jobs} differs"))?,
            }
        }
    }
    Ok("6 configurations, byte-identical merged CSVs".into())
}

fn crash_resume() -> Check {
    let corpus = common::fixtures().join("kotlin_corpus");
    let full = tempfile::tempdir().map_err(|e| e.to_string())?;
    common::run_corpus(&corpus, full.path(), &ALL, 1, 2);

    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let registry = AnalyzerRegistry::with_builtins();
    let mut config = RunConfig::new(&corpus, out.path(), &ALL);
    config.batch_size = 1;
    config.max_batches = Some(1);
    let first = runner::run(&config, &registry, None).map_err(|e| e.to_string())?;
    ensure(first.interrupted && first.completed_batches == [0], || format!("{first:?}"))?;
    let torn = runner::batch_dir(out.path(), 1);
    fs::create_dir_all(&torn).map_err(|e| e.to_string())?;
    fs::write(torn.join("kotlin_ranges.csv"), "project_id,file_path,line,range_kind\nlocal__beta,x")
        .map_err(|e| e.to_string())?;

    config.max_batches = None;
    config.resume = true;
    let second = runner::run(&config, &registry, None).map_err(|e| e.to_string())?;
    ensure(second.projects.len() == 4, || format!("{} projects", second.projects.len()))?;
    ensure(merged_bytes(out.path()) == merged_bytes(full.path()), || "resumed output differs".into())?;
    Ok("interrupted after batch 0, torn batch 1 redone, output byte-identical".into())
}

fn dedup_list() -> Check {
    let list = parse_project_list(
        "Alice/Tool\nalice/tool.git\nbob/lib/\nhttps://GitHub.com/Bob/Lib.git\ngit@github.com:carol/app.git\n\
         carol/App\ndave/old-name\neve/new-name\nfrank/util\ngitlab.com/grace/proj\n",
        Path::new("/lists"),
    );
    ensure(list.refs.len() == 10, || format!("{} entries parsed", list.refs.len()))?;
    let mut stub = MapLookup::default();
    stub.redirects.insert("github.com/dave/old-name".into(), "github.com/eve/new-name".into());
    let out = dedup(list.refs, Some(&stub));
    let keys: Vec<&str> = out.refs.iter().map(|r| r.canonical_key.as_str()).collect();
    let want = [
        "github.com/alice/tool",
        "github.com/bob/lib",
        "github.com/carol/app",
        "github.com/eve/new-name",
        "github.com/frank/util",
        "gitlab.com/grace/proj",
    ];
    ensure(keys == want, || format!("{keys:?}"))?;
    Ok("10 entries collapse to 6 canonical projects in order".into())
}

fn report_format() -> Check {
    let mut csv = String::from("project_id,file_path,line,range_kind,context_kind\n");
    let mut line = 0;
    for (kind, n) in [("DOTDOT", 522), ("UNTIL", 456), ("RANGE_TO", 15), ("DOWN_TO", 7)] {
        for _ in 0..n {
            line += 1;
            let _ = writeln!(csv, "p,f.kt,{line},{kind},FOR");
        }
    }
    let t = summarize_reader(csv.as_bytes(), &["range_kind".to_string()]).map_err(|e| e.to_string())?;
    let shown: Vec<String> = t.rows.iter().map(|r| r.percent.to_string()).collect();
    ensure(shown == ["52.2", "45.6", "1.5", "0.7"], || format!("{shown:?}"))?;
    let sum: u64 = t.rows.iter().map(|r| r.percent.0).sum();
    ensure(sum.abs_diff(1000) <= t.rows.len() as u64, || format!("percentages sum to {sum} tenths"))?;
    let svg = render_chart(&t).map_err(|e| e.to_string())?;
    let bars = svg.matches(r#"<rect class="bar""#).count();
    ensure(bars == 4, || format!("{bars} bars"))?;
    Ok(format!("{} %, 4 bars", shown.join(" / ")))
}

fn throughput() -> Check {
    let corpus = tempfile::tempdir().map_err(|e| e.to_string())?;
    common::copy_dir(&common::fixtures(), corpus.path());
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let started = Instant::now();
    let m = common::run_corpus(corpus.path(), out.path(), &ALL, 100, 4);
    let table = summarize(&out.path().join("kotlin_ranges.csv"), &["range_kind".into()]).map_err(|e| e.to_string())?;
    usagescan_core::report::emit_chart(&table, &out.path().join("ranges.svg")).map_err(|e| e.to_string())?;
    let took = started.elapsed();
    ensure(m.files_analyzed() >= 100, || format!("only {} files", m.files_analyzed()))?;
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    let listed = read_jsonl(&out.path().join("manifest.jsonl")).map_err(|e| e.to_string())?;
    ensure(
        listed.len() == m.projects.len() && listed.iter().all(|p| p.duration.is_finite() && p.duration >= 0.0),
        || "manifest lacks durations".into(),
    )?;
    Ok(format!("{} files in {} projects, {:.2}s", m.files_analyzed(), listed.len(), took.as_secs_f64()))
}

fn main() {
    let checks: [Named; 8] = [
        ("evaluator oracle equivalence", evaluator_oracle),
        ("unreachable while loops", unreachable_loops),
        ("range analyzer oracle", range_oracle),
        ("batch invariance", batch_invariance),
        ("crash and resume", crash_resume),
        ("dedup", dedup_list),
        ("report format", report_format),
        ("throughput sanity", throughput),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("AC{} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("AC{} FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
