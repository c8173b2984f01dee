//! Sound constant evaluation of expression subtrees.
//!
//! A definite result is only returned when every execution would produce
//! it. Anything the evaluator cannot prove (free names, calls, floats,
//! strings, unsupported operators, possible exceptions) is `Unknown`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::cst::{NodeKind, ParsedFile, SourceLanguage, SyntaxNode};
use crate::error::EvalError;

/// Result of evaluating an expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EvalValue {
    True,
    False,
    /// Exact integer constant.
    Int(BigInt),
    Unknown,
}

impl EvalValue {
    pub fn is_known(&self) -> bool {
        !matches!(self, EvalValue::Unknown)
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            EvalValue::True => Some(true),
            EvalValue::False => Some(false),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            EvalValue::Int(n) => Some(n),
            _ => None,
        }
    }
}

impl From<bool> for EvalValue {
    fn from(b: bool) -> Self {
        if b {
            EvalValue::True
        } else {
            EvalValue::False
        }
    }
}

impl fmt::Display for EvalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalValue::True => f.write_str("true"),
            EvalValue::False => f.write_str("false"),
            EvalValue::Int(n) => write!(f, "{n}"),
            EvalValue::Unknown => f.write_str("unknown"),
        }
    }
}

/// Evaluation lattice. `Truthy`/`Falsy` are values whose truthiness is
/// forced but whose exact value is not, e.g. Python `x and 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
enum V {
    Int(BigInt),
    Bool(bool),
    Truthy,
    Falsy,
    Unknown,
}

/// Deeper trees evaluate to `Unknown` rather than risk the stack.
const MAX_DEPTH: usize = 512;

/// Evaluates an expression node. Errors if `node` is not an expression.
pub fn eval_expr(node: SyntaxNode<'_>, file: &ParsedFile) -> Result<EvalValue, EvalError> {
    check_expression(node)?;
    Ok(match eval(node, file, file.language, 0) {
        V::Int(n) => EvalValue::Int(n),
        V::Bool(b) => EvalValue::from(b),
        V::Truthy => EvalValue::True,
        V::Falsy => EvalValue::False,
        V::Unknown => EvalValue::Unknown,
    })
}

/// Like [`eval_expr`], but coerces integers the way a condition would:
/// Python treats 0 as false and other integers as true; Kotlin has no
/// numeric truthiness, so integers are `Unknown`.
pub fn eval_bool(node: SyntaxNode<'_>, file: &ParsedFile) -> Result<EvalValue, EvalError> {
    check_expression(node)?;
    let v = eval(node, file, file.language, 0);
    Ok(match file.language {
        SourceLanguage::Python => truth(&v).map_or(EvalValue::Unknown, EvalValue::from),
        SourceLanguage::Kotlin => match v {
            V::Bool(b) => EvalValue::from(b),
            _ => EvalValue::Unknown,
        },
    })
}

fn check_expression(node: SyntaxNode<'_>) -> Result<(), EvalError> {
    use NodeKind::*;
    match node.kind() {
        FILE | BLOCK | FOR_STMT | WHILE_STMT | DO_WHILE_STMT | FUNCTION_DECL | OPERATOR_TOKEN | COMMENT => {
            Err(EvalError::NotAnExpression(node.kind()))
        }
        _ => Ok(()),
    }
}

/// Python truthiness; Kotlin callers only see `Bool` here.
fn truth(v: &V) -> Option<bool> {
    match v {
        V::Int(n) => Some(!n.is_zero()),
        V::Bool(b) => Some(*b),
        V::Truthy => Some(true),
        V::Falsy => Some(false),
        V::Unknown => None,
    }
}

fn operands<'t>(node: SyntaxNode<'t>) -> impl Iterator<Item = SyntaxNode<'t>> {
    node.children().filter(|c| !matches!(c.kind(), NodeKind::OPERATOR_TOKEN | NodeKind::COMMENT))
}

fn eval(node: SyntaxNode<'_>, file: &ParsedFile, lang: SourceLanguage, depth: usize) -> V {
    if depth > MAX_DEPTH {
        return V::Unknown;
    }
    match node.kind() {
        NodeKind::INT_LITERAL => {
            file.node_text(node).ok().and_then(|t| int_literal(t, lang)).map_or(V::Unknown, V::Int)
        }
        NodeKind::BOOL_LITERAL => match node.aux() {
            Some("True" | "true") => V::Bool(true),
            Some("False" | "false") => V::Bool(false),
            _ => V::Unknown,
        },
        NodeKind::PAREN_EXPR => match operands(node).next() {
            Some(inner) => eval(inner, file, lang, depth + 1),
            None => V::Unknown,
        },
        NodeKind::UNARY_EXPR => {
            let mut ops = operands(node);
            match (ops.next(), ops.next()) {
                (Some(x), None) => unary(node.aux().unwrap_or(""), eval(x, file, lang, depth + 1), lang),
                _ => V::Unknown,
            }
        }
        NodeKind::BINARY_EXPR => {
            let mut ops = operands(node);
            let (Some(l), Some(r), None) = (ops.next(), ops.next(), ops.next()) else {
                return V::Unknown;
            };
            let op = node.aux().unwrap_or("");
            let lv = eval(l, file, lang, depth + 1);
            let rv = eval(r, file, lang, depth + 1);
            binary(op, lv, rv, lang)
        }
        NodeKind::OTHER if node.aux() == Some("compare_chain") && lang == SourceLanguage::Python => {
            compare_chain(node, file, depth)
        }
        _ => V::Unknown,
    }
}

fn int_literal(text: &str, lang: SourceLanguage) -> Option<BigInt> {
    let clean: String = text.chars().filter(|&c| c != '_').collect();
    let lower = clean.to_ascii_lowercase();
    let (radix, digits) = if let Some(d) = lower.strip_prefix("0x") {
        (16, d)
    } else if let Some(d) = lower.strip_prefix("0b") {
        (2, d)
    } else if let Some(d) = lower.strip_prefix("0o").filter(|_| lang == SourceLanguage::Python) {
        (8, d)
    } else {
        (10, lower.as_str())
    };
    // Suffixed Kotlin literals (L, u) have other types.
    if digits.is_empty() || !digits.chars().all(|c| c.is_digit(radix)) {
        return None;
    }
    let n = BigInt::parse_bytes(digits.as_bytes(), radix)?;
    if lang == SourceLanguage::Kotlin && !fits_kotlin_int(&n) {
        return None;
    }
    Some(n)
}

/// Kotlin `Int` arithmetic wraps; results outside its range are not
/// modeled exactly, so they become `Unknown`.
fn fits_kotlin_int(n: &BigInt) -> bool {
    n.to_i32().is_some()
}

/// Python ints with bools promoted to 0/1; Kotlin keeps the types apart.
fn as_int(v: &V, lang: SourceLanguage) -> Option<BigInt> {
    match (v, lang) {
        (V::Int(n), _) => Some(n.clone()),
        (V::Bool(b), SourceLanguage::Python) => Some(BigInt::from(u8::from(*b))),
        _ => None,
    }
}

fn unary(op: &str, v: V, lang: SourceLanguage) -> V {
    match (op, lang) {
        ("not", SourceLanguage::Python) => truth(&v).map_or(V::Unknown, |b| V::Bool(!b)),
        ("!", SourceLanguage::Kotlin) => match v {
            V::Bool(b) => V::Bool(!b),
            _ => V::Unknown,
        },
        ("-", _) => as_int(&v, lang).map_or(V::Unknown, |n| int_result(-n, lang)),
        ("+", _) => as_int(&v, lang).map_or(V::Unknown, V::Int),
        _ => V::Unknown,
    }
}

fn int_result(n: BigInt, lang: SourceLanguage) -> V {
    if lang == SourceLanguage::Kotlin && !fits_kotlin_int(&n) {
        V::Unknown
    } else {
        V::Int(n)
    }
}

fn binary(op: &str, l: V, r: V, lang: SourceLanguage) -> V {
    match (op, lang) {
        ("and", SourceLanguage::Python) => match truth(&l) {
            Some(false) => l,
            Some(true) => r,
            None if truth(&r) == Some(false) => V::Falsy,
            None => V::Unknown,
        },
        ("or", SourceLanguage::Python) => match truth(&l) {
            Some(true) => l,
            Some(false) => r,
            None if truth(&r) == Some(true) => V::Truthy,
            None => V::Unknown,
        },
        ("&&", SourceLanguage::Kotlin) => match (l, r) {
            (V::Bool(false), _) | (_, V::Bool(false)) => V::Bool(false),
            (V::Bool(true), V::Bool(true)) => V::Bool(true),
            _ => V::Unknown,
        },
        ("||", SourceLanguage::Kotlin) => match (l, r) {
            (V::Bool(true), _) | (_, V::Bool(true)) => V::Bool(true),
            (V::Bool(false), V::Bool(false)) => V::Bool(false),
            _ => V::Unknown,
        },
        ("==" | "!=", _) => {
            let eq = match (&l, &r, lang) {
                (V::Bool(a), V::Bool(b), _) => Some(a == b),
                _ => match (as_int(&l, lang), as_int(&r, lang)) {
                    (Some(a), Some(b)) => Some(a == b),
                    _ => None,
                },
            };
            eq.map_or(V::Unknown, |e| V::Bool(e == (op == "==")))
        }
        ("<" | "<=" | ">" | ">=", _) => match (as_int(&l, lang), as_int(&r, lang)) {
            (Some(a), Some(b)) => V::Bool(compare(op, &a, &b)),
            _ => V::Unknown,
        },
        ("+" | "-" | "*", _) => match (as_int(&l, lang), as_int(&r, lang)) {
            (Some(a), Some(b)) => int_result(
                match op {
                    "+" => a + b,
                    "-" => a - b,
                    _ => a * b,
                },
                lang,
            ),
            _ => V::Unknown,
        },
        ("//" | "%", SourceLanguage::Python) | ("/" | "%", SourceLanguage::Kotlin) => {
            match (as_int(&l, lang), as_int(&r, lang)) {
                (Some(_), Some(b)) if b.is_zero() => V::Unknown,
                (Some(a), Some(b)) => int_result(divide(op, lang, &a, &b), lang),
                _ => V::Unknown,
            }
        }
        _ => V::Unknown,
    }
}

fn compare(op: &str, a: &BigInt, b: &BigInt) -> bool {
    match op {
        "<" => a < b,
        "<=" => a <= b,
        ">" => a > b,
        _ => a >= b,
    }
}

fn divide(op: &str, lang: SourceLanguage, a: &BigInt, b: &BigInt) -> BigInt {
    match (op, lang) {
        // Python rounds toward negative infinity.
        ("//", _) => a.div_floor(b),
        ("%", SourceLanguage::Python) => a.mod_floor(b),
        // Kotlin truncates toward zero; the remainder takes the dividend's sign.
        ("/", _) => {
            let q = a.abs() / b.abs();
            if a.is_negative() != b.is_negative() {
                -q
            } else {
                q
            }
        }
        _ => a - (divide("/", lang, a, b) * b),
    }
}

/// `a < b <= c` is `a < b and b <= c` with each operand evaluated once.
fn compare_chain(node: SyntaxNode<'_>, file: &ParsedFile, depth: usize) -> V {
    let lang = SourceLanguage::Python;
    let kids: Vec<_> = node.children().filter(|c| c.kind() != NodeKind::COMMENT).collect();
    if kids.len() < 3 || kids.len() % 2 == 0 {
        return V::Unknown;
    }
    let mut result = V::Bool(true);
    let mut lhs = eval(kids[0], file, lang, depth + 1);
    for pair in kids[1..].chunks(2) {
        let op = pair[0].aux().unwrap_or("");
        let rhs = eval(pair[1], file, lang, depth + 1);
        let step = binary(op, lhs, rhs.clone(), lang);
        result = binary("and", result, step, lang);
        lhs = rhs;
    }
    result
}
