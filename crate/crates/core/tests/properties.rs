mod common;

use std::path::Path;

use common::exprs::{self, Case};
use proptest::prelude::*;
use usagescan_core::analyzers::{KotlinRanges, UnreachableWhile};
use usagescan_core::dataset::{dedup, make_batches, parse_project_list};
use usagescan_core::{eval_bool, parse_kotlin, parse_python, Analyzer, EvalValue, ParsedFile};

fn closed_leaf() -> impl Strategy<Value = Case> {
    let leaves: Vec<Case> = exprs::leaves().into_iter().filter(|c| !c.open).collect();
    proptest::sample::select(leaves)
}

fn any_leaf() -> impl Strategy<Value = Case> {
    proptest::sample::select(exprs::leaves())
}

fn tree(leaf: BoxedStrategy<Case>) -> impl Strategy<Value = Case> {
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|c| exprs::not(&c)),
            (proptest::sample::select(exprs::OPS.to_vec()), inner.clone(), inner)
                .prop_map(|(op, a, b)| exprs::bin(op, &a, &b)),
        ]
    })
}

fn shape(f: &ParsedFile) -> Vec<(String, usize, usize, Option<String>)> {
    f.root()
        .preorder()
        .map(|n| (n.kind().to_string(), n.span().start_byte, n.span().end_byte, n.aux().map(str::to_string)))
        .collect()
}

const KOTLIN_TOKENS: &[&str] = &[
    "fun",
    "f",
    "(",
    ")",
    "{",
    "}",
    "val",
    "x",
    "=",
    "1",
    "..",
    "until",
    "downTo",
    ".rangeTo(",
    "for",
    "in",
    "while",
    "if",
    "else",
    "when",
    "->",
    "\"s..\"",
    "// c\n",
    "/* b */",
    "\n",
    " ",
    ";",
    ",",
    "'c'",
    "@",
    "?:",
    "!!",
    "<",
    ">",
    "\"${",
    "`q`",
    "class",
    "1L",
    "0x1F",
    "\"\"\"",
];

const PYTHON_TOKENS: &[&str] = &[
    "while", "if", "elif", "else", "for", "in", "def", "f", "x", ":", "(", ")", "[", "]", "\n", "    ", "\t", "1",
    "True", "not", "and", "or", "==", "+", "//", "# c", "'s'", "\"\"\"", "lambda", ",", "=", "pass", "return", "\\\n",
    "é",
];

fn soup(tokens: &'static [&'static str]) -> impl Strategy<Value = String> {
    proptest::collection::vec(proptest::sample::select(tokens), 0..60).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kotlin_trees_are_lossless_and_stable(src in soup(KOTLIN_TOKENS)) {
        let a = parse_kotlin(&src, "a.kt");
        prop_assert!(a.validate().is_ok(), "{:?}", a.validate());
        prop_assert_eq!(a.node_text(a.root()).unwrap(), src.as_str());
        let b = parse_kotlin(&src, "a.kt");
        prop_assert_eq!(shape(&a), shape(&b));
    }

    #[test]
    fn python_trees_are_lossless_and_stable(src in soup(PYTHON_TOKENS)) {
        let a = parse_python(&src, "a.py");
        prop_assert!(a.validate().is_ok(), "{:?}", a.validate());
        prop_assert_eq!(a.node_text(a.root()).unwrap(), src.as_str());
        let b = parse_python(&src, "a.py");
        prop_assert_eq!(shape(&a), shape(&b));
    }

    #[test]
    fn unreachable_while_is_sound_and_complete_on_closed_conditions(c in tree(closed_leaf().boxed())) {
        let src = format!("while {}:\n    pass\n", c.text);
        let file = parse_python(&src, "w.py");
        let reported = !UnreachableWhile.extract(&file, "p").unwrap().is_empty();
        prop_assert_eq!(reported, !c.values[0].truthy(), "{}", c.text);
    }

    #[test]
    fn hiding_a_subexpression_never_flips_a_verdict(c in tree(closed_leaf().boxed()), pick in any::<prop::sample::Index>()) {
        let file = parse_python(&format!("{}\n", c.text), "e.py");
        let expr = file.root().significant_children().next().unwrap();
        let before = eval_bool(expr, &file).unwrap();
        prop_assert_eq!(&before, &eval_bool(expr, &file).unwrap());

        // Replace one leaf-or-inner expression span with a free name.
        let subs: Vec<_> = expr.preorder().filter(|n| eval_bool(*n, &file).is_ok()).collect();
        let victim = subs[pick.index(subs.len())].span();
        let mut hidden = c.text.clone();
        hidden.replace_range(victim.start_byte..victim.end_byte, "x");
        let f2 = parse_python(&format!("{hidden}\n"), "e.py");
        let after = eval_bool(f2.root().significant_children().next().unwrap(), &f2).unwrap();
        let flipped = matches!((&before, &after), (EvalValue::True, EvalValue::False) | (EvalValue::False, EvalValue::True));
        prop_assert!(!flipped, "{} -> {}: {:?} -> {:?}", c.text, hidden, before, after);
    }

    #[test]
    fn open_verdicts_are_forced(c in tree(any_leaf().boxed())) {
        prop_assert!(common::check_cases(std::slice::from_ref(&c)).is_ok(), "{}", c.text);
    }

    #[test]
    fn dedup_is_idempotent_and_order_preserving(
        picks in proptest::collection::vec(0usize..12, 0..30),
        size in 1usize..6,
    ) {
        const POOL: [&str; 12] = [
            "a/b", "A/B", "a/b.git", "a/b/", "https://github.com/a/b", "git@github.com:a/b.git",
            "c/d", "github.com/C/D", "gitlab.com/c/d", "./local", "./Local/", "e/f",
        ];
        let text: String = picks.iter().map(|&i| format!("{}\n", POOL[i])).collect();
        let refs = parse_project_list(&text, Path::new("/base")).refs;
        let once = dedup(refs.clone(), None).refs;
        prop_assert!(once.len() <= refs.len());
        prop_assert_eq!(&dedup(once.clone(), None).refs, &once);

        // First occurrences, in input order.
        let mut seen = std::collections::HashSet::new();
        let firsts: Vec<_> = refs.iter().filter(|r| seen.insert(r.canonical_key.clone())).cloned().collect();
        prop_assert_eq!(&firsts, &once);

        let batches = make_batches(&once, size).unwrap();
        let flat: Vec<_> = batches.iter().flat_map(|b| b.projects.clone()).collect();
        prop_assert_eq!(flat, once);
        prop_assert!(batches.iter().enumerate().all(|(i, b)| b.index == i && !b.projects.is_empty() && b.projects.len() <= size));
    }
}

#[test]
fn fixture_files_round_trip() {
    for entry in walkdir::WalkDir::new(common::fixtures()) {
        let entry = entry.unwrap();
        let path = entry.path();
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("kt") => parse_kotlin(&std::fs::read_to_string(path).unwrap(), "f.kt"),
            Some("py") => parse_python(&std::fs::read_to_string(path).unwrap(), "f.py"),
            _ => continue,
        };
        parsed.validate().unwrap();
        assert_eq!(parsed.node_text(parsed.root()).unwrap(), parsed.source, "{}", path.display());
        assert!(parsed.diagnostics.is_empty(), "{}: {:?}", path.display(), parsed.diagnostics);
    }
}

#[test]
fn every_range_record_has_exactly_one_kind() {
    let corpus = common::fixtures().join("kotlin_corpus");
    for entry in walkdir::WalkDir::new(&corpus) {
        let entry = entry.unwrap();
        if entry.path().extension().is_none_or(|e| e != "kt") {
            continue;
        }
        let file = parse_kotlin(&std::fs::read_to_string(entry.path()).unwrap(), "f.kt");
        let recs = KotlinRanges.extract(&file, "p").unwrap();
        let by_kind: usize = ["DOTDOT", "UNTIL", "RANGE_TO", "DOWN_TO"]
            .iter()
            .map(|k| recs.iter().filter(|r| r.values[0] == *k).count())
            .sum();
        assert_eq!(by_kind, recs.len());
    }
}
