mod lexer;
mod parser;

use crate::cst::{ParsedFile, SourceLanguage};
use crate::frontends::raw::build_file;

/// Parses Kotlin source. Never fails: problems are reported through
/// [`ParsedFile::diagnostics`] and the affected regions become `OTHER`.
pub fn parse_kotlin(source: &str, path: &str) -> ParsedFile {
    let lexed = lexer::lex(source);
    let mut p = parser::Parser::new(source, lexed.tokens);
    let root = p.parse_file();
    let mut diagnostics = lexed.diagnostics;
    diagnostics.append(&mut p.diags);
    build_file(path, SourceLanguage::Kotlin, source.to_string(), root, &lexed.comments, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cst::NodeKind as K;

    fn kinds_with_aux(src: &str, kind: K) -> Vec<String> {
        let f = parse_kotlin(src, "t.kt");
        f.validate().unwrap();
        f.root().preorder().filter(|n| n.kind() == kind).map(|n| n.aux().unwrap_or("").to_string()).collect()
    }

    fn parse_clean(src: &str) -> ParsedFile {
        let f = parse_kotlin(src, "t.kt");
        f.validate().unwrap();
        assert!(f.diagnostics.is_empty(), "{:?}\n{}", f.diagnostics, f.debug_tree());
        assert_eq!(f.node_text(f.root()).unwrap(), src);
        f
    }

    #[test]
    fn for_over_dotdot() {
        let f = parse_clean("for (i in 1..10) {}");
        let for_stmt = f.root().first_child_of(K::FOR_STMT).unwrap();
        let range = for_stmt.descendants_of_kind(K::BINARY_EXPR).next().unwrap();
        assert_eq!(range.aux(), Some(".."));
        assert_eq!(f.node_text(range).unwrap(), "1..10");
    }

    #[test]
    fn infix_until_and_down_to() {
        let f = parse_clean("for (i in 0 until n) {}\nval d = 10 downTo 1 step 2\n");
        let infix: Vec<_> = f.root().descendants_of_kind(K::INFIX_CALL).map(|n| n.aux().unwrap()).collect();
        assert_eq!(infix, ["until", "step", "downTo"]);
    }

    #[test]
    fn member_calls_carry_callee() {
        parse_clean("val r = a.rangeTo(b)\nval s = x.downTo(0).reversed()\n");
        let calls = kinds_with_aux("val r = a.rangeTo(b)\nval s = x.downTo(0).reversed()\n", K::MEMBER_CALL);
        assert_eq!(calls, ["rangeTo", "reversed", "downTo"]);
    }

    #[test]
    fn strings_and_comments_hide_operators() {
        let src = "val s = \"a..b until c\" // 1..10 until\n/* x.rangeTo(y) */\nval t = \"${a}..${b}\"\n";
        let f = parse_clean(src);
        assert_eq!(f.root().descendants_of_kind(K::BINARY_EXPR).count(), 0);
        assert_eq!(f.root().descendants_of_kind(K::INFIX_CALL).count(), 0);
        assert_eq!(f.root().descendants_of_kind(K::MEMBER_CALL).count(), 0);
        assert_eq!(f.root().descendants_of_kind(K::COMMENT).count(), 2);
    }

    #[test]
    fn control_flow_kinds() {
        let src = "\
fun main(args: Array<String>) {
    var i = 0
    while (i < 10) { i++ }
    do { i-- } while (i > 0)
    if (i in 1..9) println(i) else println(0)
    val k = when (i) {
        in 0 until 5 -> 1
        is Int -> 2
        else -> 3
    }
    listOf(1, 2).forEach { x -> if (x in 1..2) println(x) }
}
";
        let f = parse_clean(src);
        let count = |k| f.root().descendants_of_kind(k).count();
        assert_eq!(count(K::FUNCTION_DECL), 1);
        assert_eq!(count(K::WHILE_STMT), 1);
        assert_eq!(count(K::DO_WHILE_STMT), 1);
        assert_eq!(count(K::IF_STMT), 2);
        assert_eq!(count(K::WHEN_STMT), 1);
        assert_eq!(count(K::LAMBDA), 1);
        assert_eq!(kinds_with_aux(src, K::FUNCTION_DECL), ["main"]);
        let lambda = f.root().descendants_of_kind(K::LAMBDA).next().unwrap();
        assert_eq!(lambda.descendants_of_kind(K::IF_STMT).count(), 1);
    }

    #[test]
    fn newline_ends_expression() {
        let f = parse_clean("val a = b\n(c..d).forEach { }\nval e = f\n    .rangeTo(g)\n");
        assert_eq!(f.root().descendants_of_kind(K::CALL_EXPR).count(), 0);
        assert_eq!(f.root().descendants_of_kind(K::MEMBER_CALL).count(), 2);
    }

    #[test]
    fn declarations_and_generics() {
        parse_clean(
            "package a.b\nimport c.d.*\n\n@Suppress(\"x\")\ndata class P<T : Any>(val x: Int = 1..2, val y: T) : Base(), I {\n    override fun toString(): String = \"$x\"\n    companion object { const val Z = 3 }\n}\nenum class E(val v: Int) { A(1), B(2); fun f() = v }\nval m = mapOf<String, Int>(\"a\" to 1)\nval l: (Int) -> Boolean = { it > 0 }\nfun <T> List<T>.second(): T = this[1]\n",
        );
    }

    #[test]
    fn malformed_input_degrades() {
        let f = parse_kotlin("fun f( {\n  for (i in ) }\n}}} val x = 1..2\n", "t.kt");
        f.validate().unwrap();
        assert!(f.has_diagnostics());
        assert_eq!(f.node_text(f.root()).unwrap().len(), f.source.len());
    }

    #[test]
    fn deep_nesting_is_bounded() {
        let src = format!("val x = {}1{}\n", "(".repeat(5000), ")".repeat(5000));
        let f = parse_kotlin(&src, "t.kt");
        f.validate().unwrap();
        assert!(f.has_diagnostics());
    }
}
