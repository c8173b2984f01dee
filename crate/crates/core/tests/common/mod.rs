//! Helpers and independent oracles shared by the integration tests and the
//! acceptance runner.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use usagescan_core::analyzer::AnalyzerRegistry;
use usagescan_core::runner::{run, RunConfig, RunManifest};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn copy_dir(src: &Path, dst: &Path) {
    for entry in walkdir::WalkDir::new(src) {
        let entry = entry.unwrap();
        let target = dst.join(entry.path().strip_prefix(src).unwrap());
        if entry.file_type().is_dir() {
            fs::create_dir_all(&target).unwrap();
        } else {
            fs::copy(entry.path(), &target).unwrap();
        }
    }
}

pub fn run_corpus(input: &Path, out: &Path, analyzers: &[&str], batch_size: usize, jobs: usize) -> RunManifest {
    let mut config = RunConfig::new(input, out, analyzers);
    config.batch_size = batch_size;
    config.jobs = jobs;
    run(&config, &AnalyzerRegistry::with_builtins(), None).unwrap()
}

/// Data rows of a CSV file, header dropped.
pub fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

/// Project id of a corpus subdirectory, spelled out independently of the
/// library: `local/<name>` with `/` replaced.
pub fn local_id(name: &str) -> String {
    format!("local__{}", name.to_lowercase())
}

/// Hand-written `// expect: KIND CONTEXT[; KIND CONTEXT]` markers of a
/// Kotlin corpus as sorted (project_id, file, line, kind, context) rows.
pub fn range_markers(corpus: &Path) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for entry in walkdir::WalkDir::new(corpus) {
        let entry = entry.unwrap();
        if entry.path().extension().is_none_or(|e| e != "kt") {
            continue;
        }
        let rel = entry.path().strip_prefix(corpus).unwrap();
        let mut parts = rel.iter().map(|p| p.to_str().unwrap());
        let project = parts.next().unwrap();
        let file = parts.collect::<Vec<_>>().join("/");
        let text = fs::read_to_string(entry.path()).unwrap();
        for (i, line) in text.lines().enumerate() {
            let Some((_, items)) = line.split_once("// expect:") else { continue };
            for item in items.split(';') {
                let mut w = item.split_whitespace();
                let (kind, ctx) = (w.next().unwrap(), w.next().unwrap());
                rows.push(vec![local_id(project), file.clone(), (i + 1).to_string(), kind.into(), ctx.into()]);
            }
        }
    }
    rows.sort_by(|a, b| {
        (&a[0], &a[1], a[2].parse::<u32>().unwrap(), &a[3..]).cmp(&(&b[0], &b[1], b[2].parse().unwrap(), &b[3..]))
    });
    rows
}

pub fn tally<'a>(rows: impl IntoIterator<Item = &'a Vec<String>>, col: usize) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for r in rows {
        *m.entry(r[col].clone()).or_default() += 1;
    }
    m
}

/// Expression trees over the constant-evaluation test alphabet, with a
/// direct interpreter of their Python meaning.
pub mod exprs {
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum Op {
        Add,
        Sub,
        Mul,
        Eq,
        Ne,
        Lt,
        Le,
        Gt,
        Ge,
        And,
        Or,
    }

    pub const OPS: [Op; 11] =
        [Op::Add, Op::Sub, Op::Mul, Op::Eq, Op::Ne, Op::Lt, Op::Le, Op::Gt, Op::Ge, Op::And, Op::Or];

    impl Op {
        pub fn text(self) -> &'static str {
            match self {
                Op::Add => "+",
                Op::Sub => "-",
                Op::Mul => "*",
                Op::Eq => "==",
                Op::Ne => "!=",
                Op::Lt => "<",
                Op::Le => "<=",
                Op::Gt => ">",
                Op::Ge => ">=",
                Op::And => "and",
                Op::Or => "or",
            }
        }
    }

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum Val {
        Int(i128),
        Bool(bool),
    }

    impl Val {
        pub fn truthy(self) -> bool {
            match self {
                Val::Int(n) => n != 0,
                Val::Bool(b) => b,
            }
        }
        fn num(self) -> i128 {
            match self {
                Val::Int(n) => n,
                Val::Bool(b) => b as i128,
            }
        }
    }

    pub fn apply(op: Op, a: Val, b: Val) -> Val {
        let (x, y) = (a.num(), b.num());
        match op {
            Op::Add => Val::Int(x + y),
            Op::Sub => Val::Int(x - y),
            Op::Mul => Val::Int(x * y),
            Op::Eq => Val::Bool(x == y),
            Op::Ne => Val::Bool(x != y),
            Op::Lt => Val::Bool(x < y),
            Op::Le => Val::Bool(x <= y),
            Op::Gt => Val::Bool(x > y),
            Op::Ge => Val::Bool(x >= y),
            Op::And => {
                if a.truthy() {
                    b
                } else {
                    a
                }
            }
            Op::Or => {
                if a.truthy() {
                    a
                } else {
                    b
                }
            }
        }
    }

    /// Values substituted for the free identifier.
    pub fn domain() -> Vec<Val> {
        (-3..=5).map(Val::Int).chain([Val::Bool(true), Val::Bool(false)]).collect()
    }

    /// An expression with its source text and its value under each domain
    /// substitution (all equal when closed).
    #[derive(Debug, Clone)]
    pub struct Case {
        pub text: String,
        pub open: bool,
        pub values: Vec<Val>,
        pub depth: u8,
    }

    pub fn leaves() -> Vec<Case> {
        let d = domain();
        let mut out: Vec<Case> = [0, 1, 2, 4]
            .into_iter()
            .map(|n| (n.to_string(), Val::Int(n)))
            .chain([("True".to_string(), Val::Bool(true)), ("False".to_string(), Val::Bool(false))])
            .map(|(text, v)| Case { text, open: false, values: vec![v; d.len()], depth: 1 })
            .collect();
        out.push(Case { text: "x".into(), open: true, values: d, depth: 1 });
        out
    }

    pub fn not(c: &Case) -> Case {
        Case {
            text: format!("(not {})", c.text),
            open: c.open,
            values: c.values.iter().map(|v| Val::Bool(!v.truthy())).collect(),
            depth: c.depth + 1,
        }
    }

    pub fn bin(op: Op, a: &Case, b: &Case) -> Case {
        Case {
            text: format!("({} {} {})", a.text, op.text(), b.text),
            open: a.open || b.open,
            values: a.values.iter().zip(&b.values).map(|(&x, &y)| apply(op, x, y)).collect(),
            depth: a.depth.max(b.depth) + 1,
        }
    }

    /// All trees of depth at most 2.
    pub fn upto2() -> Vec<Case> {
        let l = leaves();
        let mut out = l.clone();
        out.extend(l.iter().map(not));
        for op in OPS {
            for a in &l {
                for b in &l {
                    out.push(bin(op, a, b));
                }
            }
        }
        out
    }

    /// Calls `f` on every tree of depth exactly 3, built over `small`
    /// (the output of `upto2`).
    pub fn for_each_depth3(small: &[Case], mut f: impl FnMut(Case)) {
        for c in small.iter().filter(|c| c.depth == 2) {
            f(not(c));
        }
        for op in OPS {
            for a in small {
                for b in small {
                    if a.depth == 2 || b.depth == 2 {
                        f(bin(op, a, b));
                    }
                }
            }
        }
    }

    /// Count of trees of depth exactly 3, computed combinatorially.
    pub fn depth3_count(n1: usize, n2: usize) -> usize {
        let all = n1 + n2;
        n2 + OPS.len() * (all * all - n1 * n1)
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OracleStats {
    pub closed: usize,
    pub open: usize,
    /// Open expressions the evaluator decided (all substitutions agree).
    pub open_decided: usize,
}

/// Parses each case as a Python expression statement and compares
/// `eval_bool` against the case's interpreted values. Returns the first
/// disagreement as an error.
pub fn check_cases(cases: &[exprs::Case]) -> Result<OracleStats, String> {
    use usagescan_core::{eval_bool, parse_python, EvalValue};
    let mut text = String::with_capacity(cases.iter().map(|c| c.text.len() + 1).sum());
    for c in cases {
        text.push_str(&c.text);
        text.push('\n');
    }
    let file = parse_python(&text, "cases.py");
    if file.has_diagnostics() {
        return Err(format!("parse diagnostics: {:?}", &file.diagnostics[..file.diagnostics.len().min(3)]));
    }
    let stmts: Vec<_> = file.root().significant_children().collect();
    if stmts.len() != cases.len() {
        return Err(format!("{} statements for {} cases", stmts.len(), cases.len()));
    }
    let mut stats = OracleStats::default();
    for (node, case) in stmts.into_iter().zip(cases) {
        let got = eval_bool(node, &file).map_err(|e| format!("{}: {e}", case.text))?;
        let first = case.values[0].truthy();
        let forced = case.values.iter().all(|v| v.truthy() == first);
        let ok = match got {
            EvalValue::True => forced && first,
            EvalValue::False => forced && !first,
            EvalValue::Unknown => case.open,
            EvalValue::Int(_) => false,
        };
        if !ok {
            return Err(format!("`{}`: evaluator {got:?}, interpreter {:?}", case.text, case.values));
        }
        if case.open {
            stats.open += 1;
            stats.open_decided += got.is_known() as usize;
        } else {
            stats.closed += 1;
        }
    }
    Ok(stats)
}

/// Exhaustive check over all trees of depth at most 3; `stride` > 1
/// samples the depth-3 layer.
pub fn eval_oracle(stride: usize) -> Result<OracleStats, String> {
    use rayon::prelude::*;
    let small = exprs::upto2();
    let total = check_cases(&small)?;
    // Unit 0 holds the `not` roots; unit 1 + k*|small| + a holds the roots
    // with operator k and left operand a.
    let units = 1 + exprs::OPS.len() * small.len();
    let parts: Vec<Result<OracleStats, String>> = (0..units)
        .into_par_iter()
        .map(|u| {
            let cases: Vec<exprs::Case> = if u == 0 {
                small.iter().filter(|c| c.depth == 2).map(exprs::not).collect()
            } else {
                let (op, a) = (exprs::OPS[(u - 1) / small.len()], &small[(u - 1) % small.len()]);
                small.iter().filter(|b| a.depth == 2 || b.depth == 2).map(|b| exprs::bin(op, a, b)).collect()
            };
            let sampled: Vec<exprs::Case> =
                cases.into_iter().enumerate().filter(|(j, _)| (u + j) % stride == 0).map(|(_, c)| c).collect();
            if sampled.is_empty() {
                return Ok(OracleStats::default());
            }
            check_cases(&sampled)
        })
        .collect();
    parts.into_iter().try_fold(total, |mut t, p| {
        let p = p?;
        t.closed += p.closed;
        t.open += p.open;
        t.open_decided += p.open_decided;
        Ok(t)
    })
}
