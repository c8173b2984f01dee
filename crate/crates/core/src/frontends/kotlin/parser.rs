//! Recursive-descent parser for the Kotlin subset analyzers rely on.
//!
//! Anything the grammar does not model is kept as `OTHER` nodes or skipped
//! as gap text. Malformed input produces diagnostics and `OTHER` nodes; the
//! parser never gives up on a file.

use super::lexer::{Tok, Token};
use crate::cst::NodeKind as K;
use crate::frontends::raw::{LineIndex, RawNode};

/// Nesting limit for expressions and blocks; deeper input degrades to
/// `OTHER` instead of exhausting the stack.
const MAX_DEPTH: usize = 150;
/// Longest left-associative operator chain folded into nested nodes.
const MAX_CHAIN: usize = 2_000;

const MODIFIERS: &[&str] = &[
    "public",
    "private",
    "protected",
    "internal",
    "override",
    "open",
    "abstract",
    "final",
    "data",
    "sealed",
    "inline",
    "suspend",
    "operator",
    "infix",
    "tailrec",
    "external",
    "const",
    "lateinit",
    "enum",
    "annotation",
    "companion",
    "inner",
    "value",
    "expect",
    "actual",
    "vararg",
    "noinline",
    "crossinline",
    "reified",
];

/// Identifiers that can never act as an infix function name.
const NOT_INFIX: &[&str] = &[
    "in",
    "is",
    "as",
    "else",
    "by",
    "where",
    "catch",
    "finally",
    "fun",
    "val",
    "var",
    "if",
    "when",
    "while",
    "for",
    "do",
    "return",
    "class",
    "object",
    "interface",
    "true",
    "false",
    "null",
    "this",
    "super",
    "throw",
    "try",
    "break",
    "continue",
    "package",
    "import",
    "typealias",
];

/// Hard keywords that cannot begin an expression.
const NOT_EXPR_START: &[&str] = &[
    "else",
    "in",
    "is",
    "as",
    "val",
    "var",
    "class",
    "interface",
    "package",
    "import",
    "for",
    "while",
    "do",
    "typealias",
    "catch",
    "finally",
    "by",
    "where",
];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%="];

pub(crate) struct Parser<'s> {
    src: &'s str,
    toks: Vec<Token>,
    pos: usize,
    pub diags: Vec<String>,
    lines: LineIndex,
    /// Inside `(...)` or `[...]`, where line breaks never end an expression.
    nl_insensitive: bool,
    depth: usize,
}

impl<'s> Parser<'s> {
    pub fn new(src: &'s str, toks: Vec<Token>) -> Self {
        Parser { src, toks, pos: 0, diags: Vec::new(), lines: LineIndex::new(src), nl_insensitive: false, depth: 0 }
    }

    pub fn parse_file(&mut self) -> RawNode {
        let mut stmts = Vec::new();
        while !self.at_eof() {
            stmts.extend(self.parse_statements(false));
            if self.at_op("}") {
                let junk = self.recover("unmatched `}`");
                stmts.push(junk);
            }
        }
        RawNode::spanning(K::FILE, 0, self.src.len(), stmts)
    }

    // ---- token helpers -------------------------------------------------

    fn peek(&self) -> Token {
        self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek_at(&self, n: usize) -> Token {
        self.toks[(self.pos + n).min(self.toks.len() - 1)]
    }

    fn text(&self, t: Token) -> &'s str {
        &self.src[t.start..t.end]
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == Tok::Eof
    }

    fn at_op(&self, op: &str) -> bool {
        let t = self.peek();
        t.kind == Tok::Op && self.text(t) == op
    }

    fn at_kw(&self, kw: &str) -> bool {
        let t = self.peek();
        t.kind == Tok::Ident && self.text(t) == kw
    }

    fn is_op(&self, t: Token, op: &str) -> bool {
        t.kind == Tok::Op && self.text(t) == op
    }

    fn bump(&mut self) -> Token {
        let t = self.peek();
        if t.kind != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].end
        }
    }

    fn diag(&mut self, at: usize, msg: &str) {
        let line = self.lines.line(at);
        let col = self.lines.column(at);
        self.diags.push(format!("{line}:{col}: {msg}"));
    }

    /// A line break before the current token ends the construct.
    fn line_break(&self) -> bool {
        self.peek().nl_before && !self.nl_insensitive
    }

    fn at_stmt_end(&self) -> bool {
        self.at_eof() || self.at_op(";") || self.at_op("}") || self.line_break()
    }

    /// Consumes the current token; an opening bracket takes its whole
    /// balanced group with it.
    fn skip_balanced(&mut self) {
        let mut depth = 0usize;
        loop {
            let t = self.peek();
            if t.kind == Tok::Eof {
                return;
            }
            if t.kind == Tok::Op {
                match self.text(t) {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => depth = depth.saturating_sub(1),
                    _ => {}
                }
            }
            self.bump();
            if depth == 0 {
                return;
            }
        }
    }

    /// Skips to the end of the statement and returns the skipped region as
    /// an `OTHER` node, recording a diagnostic.
    fn recover(&mut self, msg: &str) -> RawNode {
        let start = self.peek().start;
        self.diag(start, msg);
        let first = self.pos;
        loop {
            if self.at_eof() || self.at_op(";") {
                break;
            }
            if self.pos > first && (self.line_break() || self.at_op("}")) {
                break;
            }
            if self.pos > first && self.nl_insensitive && (self.at_op(")") || self.at_op("]")) {
                break;
            }
            self.skip_balanced();
        }
        RawNode::leaf(K::OTHER, start, self.prev_end().max(start)).with_aux("error")
    }

    fn expect_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.bump();
            true
        } else {
            let at = self.peek().start;
            self.diag(at, &format!("expected `{op}`"));
            false
        }
    }

    /// Skips forward to (and consumes) the closing `)` of a group whose
    /// opener was already consumed, keeping anything skipped as `OTHER`.
    fn close_paren(&mut self, children: &mut Vec<RawNode>) {
        if self.at_op(")") {
            self.bump();
            return;
        }
        let start = self.peek().start;
        self.diag(start, "expected `)`");
        while !self.at_eof() && !self.at_op(")") && !self.at_op("{") && !self.at_op("}") {
            self.skip_balanced();
        }
        if self.prev_end() > start {
            children.push(RawNode::leaf(K::OTHER, start, self.prev_end()).with_aux("error"));
        }
        if self.at_op(")") {
            self.bump();
        }
    }

    fn with_nl<T>(&mut self, insensitive: bool, f: impl FnOnce(&mut Self) -> T) -> T {
        let saved = std::mem::replace(&mut self.nl_insensitive, insensitive);
        let out = f(self);
        self.nl_insensitive = saved;
        out
    }

    fn too_deep(&mut self) -> Option<RawNode> {
        if self.depth < MAX_DEPTH {
            return None;
        }
        let start = self.peek().start;
        self.diag(start, "nesting too deep");
        self.skip_balanced();
        Some(RawNode::leaf(K::OTHER, start, self.prev_end().max(start)).with_aux("error"))
    }

    // ---- statements ----------------------------------------------------

    /// Statements up to a closing `}` (left unconsumed) or end of file.
    fn parse_statements(&mut self, in_braces: bool) -> Vec<RawNode> {
        let mut out = Vec::new();
        loop {
            while self.at_op(";") {
                self.bump();
            }
            if self.at_eof() || self.at_op("}") {
                break;
            }
            let before = self.pos;
            if let Some(stmt) = self.parse_statement() {
                out.push(stmt);
            }
            if !self.at_stmt_end() {
                let junk = self.recover("unexpected token");
                out.push(junk);
            } else if self.pos == before {
                let junk = self.recover("expected a statement");
                out.push(junk);
            }
        }
        if in_braces && self.at_eof() {
            let at = self.peek().start;
            self.diag(at, "missing `}`");
        }
        out
    }

    /// Annotations, labels and modifiers in front of a declaration or
    /// statement. Returns true if `enum` was among the modifiers.
    fn skip_prefixes(&mut self) -> bool {
        let mut is_enum = false;
        loop {
            let t = self.peek();
            match t.kind {
                Tok::AtIdent => {
                    self.bump();
                    if self.at_op(":") && !self.peek().ws_before {
                        self.bump();
                        if self.peek().kind == Tok::Ident {
                            self.bump();
                        }
                    }
                    if self.at_op("(") && !self.peek().ws_before {
                        self.skip_balanced();
                    }
                }
                Tok::LabelDef => {
                    self.bump();
                }
                Tok::Ident
                    if MODIFIERS.contains(&self.text(t))
                        && self.peek_at(1).kind == Tok::Ident
                        && !self.peek_at(1).nl_before =>
                {
                    is_enum |= self.text(t) == "enum";
                    self.bump();
                }
                _ => return is_enum,
            }
        }
    }

    fn parse_statement(&mut self) -> Option<RawNode> {
        if let Some(deep) = self.too_deep() {
            return Some(deep);
        }
        self.depth += 1;
        let node = self.parse_statement_inner();
        self.depth -= 1;
        node
    }

    fn parse_statement_inner(&mut self) -> Option<RawNode> {
        let is_enum = self.skip_prefixes();
        let t = self.peek();
        if t.kind == Tok::Ident {
            match self.text(t) {
                "package" | "import" | "typealias" => return Some(self.skip_line(self.text(t))),
                "fun" if self.peek_at(1).kind == Tok::Ident && self.text(self.peek_at(1)) == "interface" => {
                    self.bump();
                    return Some(self.parse_type_decl(false));
                }
                "fun" => return Some(self.parse_function()),
                "class" | "interface" | "object" => return Some(self.parse_type_decl(is_enum)),
                "val" | "var" => return Some(self.parse_property()),
                "for" => return Some(self.parse_for()),
                "while" => return Some(self.parse_while()),
                "do" => return Some(self.parse_do_while()),
                "constructor" if self.peek_at(1).kind == Tok::Op => return Some(self.parse_function()),
                "init" if self.is_op(self.peek_at(1), "{") => {
                    let kw = self.bump();
                    let block = self.parse_block();
                    return Some(RawNode::spanning(K::OTHER, kw.start, block.end, vec![block]).with_aux("init"));
                }
                _ => {}
            }
        }
        let lhs = self.parse_expr()?;
        let t = self.peek();
        if t.kind == Tok::Op && ASSIGN_OPS.contains(&self.text(t)) && !self.line_break() {
            let op_tok = self.bump();
            let op = self.text(op_tok).to_string();
            let mut children = vec![lhs];
            match self.parse_expr() {
                Some(rhs) => children.push(rhs),
                None => {
                    let at = self.peek().start;
                    self.diag(at, "expected an expression after assignment");
                }
            }
            return Some(RawNode::wrap(K::OTHER, children).with_aux(op));
        }
        Some(lhs)
    }

    fn skip_line(&mut self, what: &str) -> RawNode {
        let kw = self.bump();
        while !self.at_eof() && !self.at_op(";") && !self.peek().nl_before {
            self.bump();
        }
        RawNode::leaf(K::OTHER, kw.start, self.prev_end()).with_aux(what)
    }

    fn parse_block(&mut self) -> RawNode {
        let open = self.bump();
        let stmts = self.with_nl(false, |p| p.parse_statements(true));
        if self.at_op("}") {
            self.bump();
        }
        RawNode::spanning(K::BLOCK, open.start, self.prev_end(), stmts)
    }

    /// Body of a loop or branch: a block, a single statement, or nothing.
    fn parse_control_body(&mut self) -> Option<RawNode> {
        if self.at_op("{") {
            return Some(self.parse_block());
        }
        if self.at_op(";") || self.at_eof() || self.at_op("}") || self.at_op(")") {
            return None;
        }
        self.with_nl(false, |p| p.parse_statement())
    }

    fn parse_function(&mut self) -> RawNode {
        let kw = self.bump();
        let mut children = Vec::new();
        let mut name: Option<Token> = None;
        if self.at_op("<") {
            self.skip_angle();
        }
        // Receiver type and name, up to the parameter list.
        while !self.at_op("(") && !self.at_op("{") && !self.at_op("=") && !self.at_stmt_end() {
            if self.at_op("<") {
                self.skip_angle();
                continue;
            }
            let t = self.bump();
            if t.kind == Tok::Ident {
                name = Some(t);
            }
        }
        if let Some(n) = name {
            children.push(RawNode::leaf_aux(K::IDENTIFIER, n.start, n.end, self.ident_name(n)));
        }
        if self.at_op("(") {
            children.extend(self.parse_params());
        }
        if self.at_op(":") {
            self.bump();
            self.skip_type();
        }
        if self.at_kw("where") {
            while !self.at_op("{") && !self.at_op("=") && !self.at_stmt_end() {
                self.skip_balanced();
            }
        }
        // Secondary constructor delegation: `: this(...)`.
        if self.at_op(":") {
            self.bump();
            if let Some(call) = self.parse_expr() {
                children.push(call);
            }
        }
        if self.at_op("{") {
            children.push(self.parse_block());
        } else if self.at_op("=") {
            self.bump();
            match self.parse_expr() {
                Some(body) => children.push(body),
                None => {
                    let at = self.peek().start;
                    self.diag(at, "expected function body expression");
                }
            }
        }
        let mut node = RawNode::spanning(K::FUNCTION_DECL, kw.start, self.prev_end(), children);
        node.aux = name.map(|n| self.ident_name(n).to_string());
        node
    }

    /// `( name: Type = default, ... )`; only default values become nodes.
    fn parse_params(&mut self) -> Vec<RawNode> {
        self.bump();
        let mut out = Vec::new();
        self.with_nl(true, |p| {
            loop {
                if p.at_eof() || p.at_op(")") || p.at_op("{") || p.at_op("}") {
                    break;
                }
                if p.at_op("=") {
                    p.bump();
                    if let Some(e) = p.parse_expr() {
                        out.push(e);
                    }
                    continue;
                }
                p.skip_balanced();
            }
            if !p.expect_op(")") {
                // leave recovery to the caller's statement loop
            }
        });
        out
    }

    fn parse_type_decl(&mut self, is_enum: bool) -> RawNode {
        let kw = self.bump();
        let kind = self.text(kw).to_string();
        let mut children = Vec::new();
        loop {
            if self.at_op("{") || self.at_eof() || self.at_op(";") || self.at_op("}") {
                break;
            }
            if self.line_break() {
                let prev = self.text(self.toks[self.pos - 1]);
                let t = self.peek();
                let continues = matches!(prev, ":" | "," | "by" | "where")
                    || (t.kind == Tok::Op && matches!(self.text(t), ":" | ","))
                    || (t.kind == Tok::Ident && matches!(self.text(t), "where" | "by"));
                if !continues {
                    break;
                }
            }
            if self.at_op("(") {
                children.extend(self.parse_params());
            } else if self.at_op("<") {
                self.skip_angle();
            } else {
                self.bump();
            }
        }
        if self.at_op("{") {
            children.push(self.parse_class_body(is_enum));
        }
        RawNode::spanning(K::OTHER, kw.start, self.prev_end(), children).with_aux(kind)
    }

    fn parse_class_body(&mut self, is_enum: bool) -> RawNode {
        let open = self.bump();
        let mut stmts = Vec::new();
        self.with_nl(false, |p| {
            if is_enum {
                p.parse_enum_entries(&mut stmts);
            }
            stmts.extend(p.parse_statements(true));
        });
        if self.at_op("}") {
            self.bump();
        }
        RawNode::spanning(K::BLOCK, open.start, self.prev_end(), stmts)
    }

    fn parse_enum_entries(&mut self, out: &mut Vec<RawNode>) {
        loop {
            self.skip_prefixes();
            let t = self.peek();
            if t.kind != Tok::Ident || NOT_INFIX.contains(&self.text(t)) || self.text(t) == "fun" {
                break;
            }
            let name = self.bump();
            let mut children = vec![RawNode::leaf_aux(K::IDENTIFIER, name.start, name.end, self.ident_name(name))];
            if self.at_op("(") {
                children.extend(self.parse_call_args());
            }
            if self.at_op("{") {
                children.push(self.parse_class_body(false));
            }
            out.push(RawNode::wrap(K::OTHER, children).with_aux("enum_entry"));
            if self.at_op(",") {
                self.bump();
                continue;
            }
            if self.at_op(";") {
                self.bump();
            }
            break;
        }
    }

    fn parse_property(&mut self) -> RawNode {
        let kw = self.bump();
        let kind = self.text(kw).to_string();
        let mut children = Vec::new();
        if self.at_op("<") {
            self.skip_angle();
        }
        if self.at_op("(") {
            self.skip_balanced();
        } else {
            let mut name = None;
            while !self.at_stmt_end() && !self.at_op(":") && !self.at_op("=") && !self.at_kw("by") {
                if self.at_op("<") {
                    self.skip_angle();
                    continue;
                }
                let t = self.peek();
                if t.kind != Tok::Ident && !self.at_op(".") && !self.at_op("?") {
                    break;
                }
                if t.kind == Tok::Ident {
                    name = Some(t);
                }
                self.bump();
            }
            if let Some(n) = name {
                children.push(RawNode::leaf_aux(K::IDENTIFIER, n.start, n.end, self.ident_name(n)));
            }
        }
        if self.at_op(":") {
            self.bump();
            self.skip_type();
        }
        if (self.at_op("=") || self.at_kw("by")) && !self.line_break() {
            self.bump();
            match self.parse_expr() {
                Some(e) => children.push(e),
                None => {
                    let at = self.peek().start;
                    self.diag(at, "expected an initializer");
                }
            }
        }
        RawNode::spanning(K::OTHER, kw.start, self.prev_end(), children).with_aux(kind)
    }

    fn parse_for(&mut self) -> RawNode {
        let kw = self.bump();
        let mut children = Vec::new();
        if self.expect_op("(") {
            self.with_nl(true, |p| {
                if p.at_op("(") {
                    p.skip_balanced();
                } else if p.peek().kind == Tok::Ident && !p.at_kw("in") {
                    let t = p.bump();
                    children.push(RawNode::leaf_aux(K::IDENTIFIER, t.start, t.end, p.ident_name(t)));
                }
                if p.at_op(":") {
                    p.bump();
                    p.skip_type();
                }
                if p.at_kw("in") {
                    p.bump();
                    match p.parse_expr() {
                        Some(e) => children.push(e),
                        None => {
                            let at = p.peek().start;
                            p.diag(at, "expected loop range");
                        }
                    }
                } else {
                    let at = p.peek().start;
                    p.diag(at, "expected `in`");
                }
                p.close_paren(&mut children);
            });
        }
        if let Some(body) = self.parse_control_body() {
            children.push(body);
        }
        RawNode::spanning(K::FOR_STMT, kw.start, self.prev_end(), children)
    }

    fn parse_paren_condition(&mut self, children: &mut Vec<RawNode>) {
        if !self.expect_op("(") {
            return;
        }
        self.with_nl(true, |p| {
            match p.parse_expr() {
                Some(c) => children.push(c),
                None => {
                    let at = p.peek().start;
                    p.diag(at, "expected condition");
                }
            }
            p.close_paren(children);
        });
    }

    fn parse_while(&mut self) -> RawNode {
        let kw = self.bump();
        let mut children = Vec::new();
        self.parse_paren_condition(&mut children);
        if let Some(body) = self.parse_control_body() {
            children.push(body);
        }
        RawNode::spanning(K::WHILE_STMT, kw.start, self.prev_end(), children)
    }

    fn parse_do_while(&mut self) -> RawNode {
        let kw = self.bump();
        let mut children = Vec::new();
        if !self.at_kw("while") {
            if let Some(body) = self.parse_control_body() {
                children.push(body);
            }
        }
        if self.at_kw("while") {
            self.bump();
            self.parse_paren_condition(&mut children);
        } else {
            let at = self.peek().start;
            self.diag(at, "expected `while` after `do` body");
        }
        RawNode::spanning(K::DO_WHILE_STMT, kw.start, self.prev_end(), children)
    }

    // ---- types ---------------------------------------------------------

    /// Skips `<...>` type parameters/arguments starting at `<`.
    fn skip_angle(&mut self) {
        let mut depth = 0usize;
        loop {
            let t = self.peek();
            if t.kind == Tok::Eof {
                return;
            }
            if t.kind == Tok::Op {
                match self.text(t) {
                    "<" => depth += 1,
                    ">" => depth -= 1,
                    "(" | "[" => {
                        self.skip_balanced();
                        continue;
                    }
                    ";" | "{" | "}" | "=" | ")" | "]" => return,
                    _ => {}
                }
            }
            self.bump();
            if depth == 0 {
                return;
            }
        }
    }

    fn skip_type(&mut self) {
        let mut expect_atom = true;
        let mut after_paren = false;
        loop {
            let t = self.peek();
            if self.line_break() && !expect_atom {
                return;
            }
            if expect_atom {
                match t.kind {
                    Tok::Ident if !matches!(self.text(t), "where" | "by" | "in" | "else") => {
                        self.bump();
                        if self.at_op("<") && !self.peek().ws_before {
                            self.skip_angle();
                        }
                        expect_atom = false;
                        after_paren = false;
                    }
                    Tok::AtIdent => {
                        self.bump();
                    }
                    Tok::Op if self.text(t) == "(" => {
                        self.skip_balanced();
                        expect_atom = false;
                        after_paren = true;
                    }
                    Tok::Op if self.text(t) == "*" => {
                        self.bump();
                        expect_atom = false;
                    }
                    _ => return,
                }
            } else {
                match (t.kind, self.text(t)) {
                    (Tok::Op, ".") => {
                        self.bump();
                        expect_atom = true;
                    }
                    (Tok::Op, "?") => {
                        self.bump();
                    }
                    (Tok::Op, "->") if after_paren => {
                        self.bump();
                        expect_atom = true;
                    }
                    _ => return,
                }
            }
        }
    }

    /// Whether a `<` after an identifier opens type arguments of a generic
    /// call such as `listOf<Int>(1)`.
    fn generic_call_ahead(&self) -> Option<usize> {
        let mut depth = 0usize;
        let mut i = self.pos;
        loop {
            let t = self.toks.get(i)?;
            match t.kind {
                Tok::Op => match self.text(*t) {
                    "<" => depth += 1,
                    ">" => {
                        depth -= 1;
                        if depth == 0 {
                            let next = self.toks.get(i + 1)?;
                            let ok = next.kind == Tok::Op
                                && !next.nl_before
                                && matches!(self.text(*next), "(" | "::" | "." | "?." | "{");
                            return ok.then_some(i + 1);
                        }
                    }
                    "," | "." | "?" | "*" | "(" | ")" | "->" | ":" => {}
                    _ => return None,
                },
                Tok::Ident | Tok::AtIdent => {}
                _ => return None,
            }
            i += 1;
            if i - self.pos > 64 {
                return None;
            }
        }
    }

    // ---- expressions ---------------------------------------------------

    fn ident_name(&self, t: Token) -> &'s str {
        self.text(t).trim_matches('`').trim_end_matches('@')
    }

    pub fn parse_expr(&mut self) -> Option<RawNode> {
        self.parse_binary(0)
    }

    fn continues_expr(&self, op: &str) -> bool {
        !self.line_break() || matches!(op, "&&" | "||" | "?:" | "." | "?." | "::" | "as" | "as?")
    }

    fn parse_binary(&mut self, level: u8) -> Option<RawNode> {
        const OPS: [&[&str]; 6] =
            [&["||"], &["&&"], &["==", "!=", "===", "!=="], &["<", ">", "<=", ">="], &[], &["?:"]];
        match level {
            0..=3 | 5 => {
                let mut lhs = self.parse_binary(level + 1)?;
                let mut chain = 0;
                loop {
                    let t = self.peek();
                    let op = self.text(t);
                    if t.kind != Tok::Op || !OPS[level as usize].contains(&op) || !self.continues_expr(op) {
                        break;
                    }
                    if chain >= MAX_CHAIN {
                        break;
                    }
                    chain += 1;
                    self.bump();
                    let op_node = RawNode::leaf_aux(K::OPERATOR_TOKEN, t.start, t.end, op);
                    lhs = self.finish_binary(lhs, op_node, level + 1);
                }
                Some(lhs)
            }
            4 => self.parse_named_checks(),
            6 => self.parse_infix(),
            7 => self.parse_arith(&["..", "..<"], 8),
            8 => self.parse_arith(&["+", "-"], 9),
            9 => self.parse_arith(&["*", "/", "%"], 10),
            _ => self.parse_as(),
        }
    }

    fn finish_binary(&mut self, lhs: RawNode, op: RawNode, rhs_level: u8) -> RawNode {
        let aux = op.aux.clone().unwrap_or_default();
        let mut children = vec![lhs, op];
        match self.parse_binary(rhs_level) {
            Some(rhs) => children.push(rhs),
            None => {
                let at = self.peek().start;
                self.diag(at, &format!("expected right operand of `{aux}`"));
            }
        }
        RawNode::wrap(K::BINARY_EXPR, children).with_aux(aux)
    }

    fn parse_arith(&mut self, ops: &[&str], next: u8) -> Option<RawNode> {
        let mut lhs = self.parse_binary(next)?;
        let mut chain = 0;
        loop {
            let t = self.peek();
            let op = self.text(t);
            if t.kind != Tok::Op || !ops.contains(&op) || self.line_break() || chain >= MAX_CHAIN {
                break;
            }
            chain += 1;
            self.bump();
            let op_node = RawNode::leaf_aux(K::OPERATOR_TOKEN, t.start, t.end, op);
            lhs = self.finish_binary(lhs, op_node, next);
        }
        Some(lhs)
    }

    /// `in`, `!in`, `is`, `!is`.
    fn parse_named_checks(&mut self) -> Option<RawNode> {
        let mut lhs = self.parse_binary(5)?;
        let mut chain = 0;
        loop {
            if self.line_break() || chain >= MAX_CHAIN {
                break;
            }
            let t = self.peek();
            let (negated, kw_tok) = if self.is_op(t, "!")
                && self.peek_at(1).kind == Tok::Ident
                && !self.peek_at(1).ws_before
                && matches!(self.text(self.peek_at(1)), "in" | "is")
            {
                (true, self.peek_at(1))
            } else if t.kind == Tok::Ident && matches!(self.text(t), "in" | "is") {
                (false, t)
            } else {
                break;
            };
            chain += 1;
            let word = self.text(kw_tok);
            let aux = if negated { format!("!{word}") } else { word.to_string() };
            if negated {
                self.bump();
            }
            self.bump();
            let op_node = RawNode::leaf_aux(K::OPERATOR_TOKEN, t.start, kw_tok.end, &aux);
            if word == "is" {
                self.skip_type();
                let end = self.prev_end();
                let mut node = RawNode::wrap(K::OTHER, vec![lhs, op_node]).with_aux(aux);
                node.end = end;
                lhs = node;
            } else {
                lhs = self.finish_binary(lhs, op_node, 5);
            }
        }
        Some(lhs)
    }

    /// `a until b`, `a downTo b`, `a step 2`: any identifier between two
    /// expressions on one line.
    fn parse_infix(&mut self) -> Option<RawNode> {
        let mut lhs = self.parse_binary(7)?;
        let mut chain = 0;
        loop {
            let t = self.peek();
            if t.kind != Tok::Ident
                || NOT_INFIX.contains(&self.text(t))
                || self.line_break()
                || !self.can_start_expr(self.peek_at(1))
                || chain >= MAX_CHAIN
            {
                break;
            }
            chain += 1;
            self.bump();
            let name = self.ident_name(t).to_string();
            let op_node = RawNode::leaf_aux(K::IDENTIFIER, t.start, t.end, &name);
            let mut children = vec![lhs, op_node];
            match self.parse_binary(7) {
                Some(rhs) => children.push(rhs),
                None => {
                    let at = self.peek().start;
                    self.diag(at, &format!("expected right operand of `{name}`"));
                }
            }
            lhs = RawNode::wrap(K::INFIX_CALL, children).with_aux(name);
        }
        Some(lhs)
    }

    fn can_start_expr(&self, t: Token) -> bool {
        match t.kind {
            Tok::Ident => !NOT_EXPR_START.contains(&self.text(t)),
            Tok::Int | Tok::Float | Tok::Str | Tok::AtIdent | Tok::LabelDef => true,
            Tok::Op => matches!(self.text(t), "(" | "{" | "-" | "+" | "!" | "::" | "[" | "++" | "--"),
            Tok::Eof => false,
        }
    }

    fn parse_as(&mut self) -> Option<RawNode> {
        let mut lhs = self.parse_prefix()?;
        while self.at_kw("as") && self.continues_expr("as") {
            let kw = self.bump();
            let mut end = kw.end;
            if self.at_op("?") && !self.peek().ws_before {
                end = self.bump().end;
            }
            let op_node = RawNode::leaf_aux(K::OPERATOR_TOKEN, kw.start, end, "as");
            self.skip_type();
            let type_end = self.prev_end();
            let mut node = RawNode::wrap(K::OTHER, vec![lhs, op_node]).with_aux("as");
            node.end = type_end;
            lhs = node;
        }
        Some(lhs)
    }

    fn parse_prefix(&mut self) -> Option<RawNode> {
        if let Some(deep) = self.too_deep() {
            return Some(deep);
        }
        self.depth += 1;
        let node = self.parse_prefix_inner();
        self.depth -= 1;
        node
    }

    fn parse_prefix_inner(&mut self) -> Option<RawNode> {
        let t = self.peek();
        match t.kind {
            Tok::Op if matches!(self.text(t), "-" | "+" | "!" | "++" | "--" | "!!") => {
                self.bump();
                let op = self.text(t);
                // `!!x` in prefix position is a double negation.
                let (first, second) = if op == "!!" {
                    (
                        RawNode::leaf_aux(K::OPERATOR_TOKEN, t.start, t.start + 1, "!"),
                        Some(RawNode::leaf_aux(K::OPERATOR_TOKEN, t.start + 1, t.end, "!")),
                    )
                } else {
                    (RawNode::leaf_aux(K::OPERATOR_TOKEN, t.start, t.end, op), None)
                };
                let operand = self.parse_prefix();
                let inner = match second {
                    Some(op2) => {
                        let mut c = vec![op2];
                        c.extend(operand);
                        RawNode::wrap(K::UNARY_EXPR, c).with_aux("!")
                    }
                    None => {
                        let mut c = vec![first];
                        match operand {
                            Some(o) => c.push(o),
                            None => {
                                let at = self.peek().start;
                                self.diag(at, &format!("expected operand of `{op}`"));
                            }
                        }
                        return Some(RawNode::wrap(K::UNARY_EXPR, c).with_aux(op));
                    }
                };
                Some(RawNode::wrap(K::UNARY_EXPR, vec![first, inner]).with_aux("!"))
            }
            Tok::AtIdent => {
                self.bump();
                if self.at_op("(") && !self.peek().ws_before {
                    self.skip_balanced();
                }
                self.parse_prefix()
            }
            Tok::LabelDef => {
                self.bump();
                self.parse_prefix()
            }
            _ => {
                let primary = self.parse_primary()?;
                Some(self.parse_postfix(primary))
            }
        }
    }

    fn callable(node: &RawNode) -> bool {
        matches!(node.kind, K::IDENTIFIER | K::CALL_EXPR | K::MEMBER_CALL)
            || (node.kind == K::OTHER && node.aux.as_deref().is_some_and(|a| a.starts_with('.')))
    }

    fn parse_postfix(&mut self, mut lhs: RawNode) -> RawNode {
        let mut chain = 0;
        loop {
            if chain >= MAX_CHAIN {
                return lhs;
            }
            chain += 1;
            let t = self.peek();
            if t.kind != Tok::Op {
                return lhs;
            }
            let op = self.text(t);
            match op {
                "<" if !t.ws_before && matches!(lhs.kind, K::IDENTIFIER) => match self.generic_call_ahead() {
                    Some(after) => self.pos = after,
                    None => return lhs,
                },
                "(" if !t.nl_before => {
                    let callee = match lhs.kind {
                        K::IDENTIFIER => lhs.aux.clone(),
                        _ => None,
                    };
                    let mut children = vec![lhs];
                    children.extend(self.parse_call_args());
                    children.extend(self.trailing_lambdas());
                    let mut node = RawNode::wrap(K::CALL_EXPR, children);
                    node.end = node.end.max(self.prev_end());
                    node.aux = callee;
                    lhs = node;
                }
                "{" if !t.nl_before && Self::callable(&lhs) => {
                    let lambdas = self.trailing_lambdas();
                    lhs = if lhs.kind == K::IDENTIFIER {
                        let callee = lhs.aux.clone();
                        let mut children = vec![lhs];
                        children.extend(lambdas);
                        let mut node = RawNode::wrap(K::CALL_EXPR, children);
                        node.aux = callee;
                        node
                    } else {
                        let mut node = lhs;
                        node.children.extend(lambdas);
                        node.end = self.prev_end();
                        if node.kind == K::OTHER {
                            // `recv.name { ... }`: a member call with only a lambda.
                            node.kind = K::MEMBER_CALL;
                            node.aux = node.aux.map(|a| a.trim_start_matches('.').to_string());
                        }
                        node
                    };
                }
                "." | "?." => {
                    if !self.continues_expr(op) {
                        return lhs;
                    }
                    let name_tok = self.peek_at(1);
                    if name_tok.kind != Tok::Ident {
                        return lhs;
                    }
                    self.bump();
                    self.bump();
                    let name = self.ident_name(name_tok).to_string();
                    let name_node = RawNode::leaf_aux(K::IDENTIFIER, name_tok.start, name_tok.end, &name);
                    if self.at_op("<") && !self.peek().ws_before {
                        if let Some(after) = self.generic_call_ahead() {
                            self.pos = after;
                        }
                    }
                    if self.at_op("(") && !self.peek().nl_before {
                        let mut children = vec![lhs, name_node];
                        children.extend(self.parse_call_args());
                        children.extend(self.trailing_lambdas());
                        let mut node = RawNode::wrap(K::MEMBER_CALL, children).with_aux(name);
                        node.end = node.end.max(self.prev_end());
                        lhs = node;
                    } else {
                        lhs = RawNode::wrap(K::OTHER, vec![lhs, name_node]).with_aux(format!(".{name}"));
                    }
                }
                "::" => {
                    self.bump();
                    if self.peek().kind == Tok::Ident {
                        self.bump();
                    }
                    let end = self.prev_end();
                    let mut node = RawNode::wrap(K::OTHER, vec![lhs]).with_aux("::");
                    node.end = end;
                    lhs = node;
                }
                "[" if !t.nl_before => {
                    let mut children = vec![lhs];
                    children.extend(self.parse_bracket_args());
                    let mut node = RawNode::wrap(K::OTHER, children).with_aux("[]");
                    node.end = self.prev_end();
                    lhs = node;
                }
                "++" | "--" | "!!" if !t.nl_before => {
                    self.bump();
                    let op_node = RawNode::leaf_aux(K::OPERATOR_TOKEN, t.start, t.end, op);
                    lhs = RawNode::wrap(K::UNARY_EXPR, vec![lhs, op_node]).with_aux(format!("post{op}"));
                }
                _ => return lhs,
            }
        }
    }

    fn trailing_lambdas(&mut self) -> Vec<RawNode> {
        let mut out = Vec::new();
        loop {
            if self.at_op("{") && !self.peek().nl_before {
                out.push(self.parse_lambda());
            } else if self.peek().kind == Tok::LabelDef && self.is_op(self.peek_at(1), "{") && !self.peek().nl_before {
                self.bump();
                out.push(self.parse_lambda());
            } else {
                return out;
            }
        }
    }

    fn parse_call_args(&mut self) -> Vec<RawNode> {
        self.bump();
        let mut out = Vec::new();
        self.with_nl(true, |p| {
            p.parse_arg_list(")", &mut out);
            p.close_paren(&mut out);
        });
        out
    }

    fn parse_bracket_args(&mut self) -> Vec<RawNode> {
        self.bump();
        let mut out = Vec::new();
        self.with_nl(true, |p| {
            p.parse_arg_list("]", &mut out);
            if !p.expect_op("]") {
                while !p.at_eof() && !p.at_op("]") && !p.at_op("}") {
                    p.skip_balanced();
                }
                if p.at_op("]") {
                    p.bump();
                }
            }
        });
        out
    }

    fn parse_arg_list(&mut self, close: &str, out: &mut Vec<RawNode>) {
        loop {
            if self.at_eof() || self.at_op(close) || self.at_op("}") {
                return;
            }
            if self.at_op(",") || self.at_op("*") {
                self.bump();
                continue;
            }
            // named argument
            if self.peek().kind == Tok::Ident && self.is_op(self.peek_at(1), "=") {
                self.bump();
                self.bump();
            }
            match self.parse_expr() {
                Some(e) => out.push(e),
                None => {
                    let start = self.peek().start;
                    self.diag(start, "unexpected token in argument list");
                    self.skip_balanced();
                    out.push(RawNode::leaf(K::OTHER, start, self.prev_end()).with_aux("error"));
                }
            }
            if !self.at_op(",") && !self.at_op(close) {
                if self.at_eof() || self.at_op("}") {
                    return;
                }
                let start = self.peek().start;
                self.diag(start, "expected `,`");
                while !self.at_eof() && !self.at_op(",") && !self.at_op(close) && !self.at_op("}") {
                    self.skip_balanced();
                }
                out.push(RawNode::leaf(K::OTHER, start, self.prev_end()).with_aux("error"));
            }
        }
    }

    fn parse_lambda(&mut self) -> RawNode {
        let open = self.bump();
        if let Some(arrow) = self.lambda_arrow() {
            self.pos = arrow + 1;
        }
        let stmts = self.with_nl(false, |p| p.parse_statements(true));
        if self.at_op("}") {
            self.bump();
        }
        RawNode::spanning(K::LAMBDA, open.start, self.prev_end(), stmts)
    }

    /// Token index of the `->` ending a lambda parameter list, if any.
    fn lambda_arrow(&self) -> Option<usize> {
        let mut depth = 0usize;
        let mut i = self.pos;
        while let Some(t) = self.toks.get(i) {
            match t.kind {
                Tok::Ident | Tok::AtIdent => {}
                Tok::Op => match self.text(*t) {
                    "->" if depth == 0 => return Some(i),
                    "(" | "<" => depth += 1,
                    ")" | ">" => depth = depth.checked_sub(1)?,
                    "," | ":" | "?" | "." | "*" | "->" => {}
                    _ => return None,
                },
                _ => return None,
            }
            i += 1;
        }
        None
    }

    fn parse_primary(&mut self) -> Option<RawNode> {
        let t = self.peek();
        match t.kind {
            Tok::Int => {
                self.bump();
                Some(RawNode::leaf(K::INT_LITERAL, t.start, t.end))
            }
            Tok::Float => {
                self.bump();
                Some(RawNode::leaf_aux(K::OTHER, t.start, t.end, "float"))
            }
            Tok::Str => {
                self.bump();
                Some(RawNode::leaf(K::STRING_LITERAL, t.start, t.end))
            }
            Tok::Ident => self.parse_word(t),
            Tok::Op => match self.text(t) {
                "(" => {
                    self.bump();
                    let mut children = Vec::new();
                    self.with_nl(true, |p| {
                        match p.parse_expr() {
                            Some(e) => children.push(e),
                            None => {
                                let at = p.peek().start;
                                p.diag(at, "expected expression in parentheses");
                            }
                        }
                        p.close_paren(&mut children);
                    });
                    Some(RawNode::spanning(K::PAREN_EXPR, t.start, self.prev_end(), children))
                }
                "{" => Some(self.parse_lambda()),
                "::" => {
                    self.bump();
                    if self.peek().kind == Tok::Ident {
                        self.bump();
                    }
                    Some(RawNode::leaf_aux(K::OTHER, t.start, self.prev_end(), "::"))
                }
                "[" => {
                    let children = self.parse_bracket_args();
                    Some(RawNode::spanning(K::OTHER, t.start, self.prev_end(), children).with_aux("[]"))
                }
                _ => None,
            },
            _ => None,
        }
    }

    fn parse_word(&mut self, t: Token) -> Option<RawNode> {
        let word = self.text(t);
        match word {
            "true" | "false" => {
                self.bump();
                Some(RawNode::leaf_aux(K::BOOL_LITERAL, t.start, t.end, word))
            }
            "null" => {
                self.bump();
                Some(RawNode::leaf_aux(K::OTHER, t.start, t.end, "null"))
            }
            "this" | "super" => {
                self.bump();
                if self.peek().kind == Tok::AtIdent && !self.peek().ws_before {
                    self.bump();
                }
                if word == "super" && self.at_op("<") {
                    self.skip_angle();
                }
                Some(RawNode::leaf_aux(K::IDENTIFIER, t.start, self.prev_end(), word))
            }
            "if" => Some(self.parse_if()),
            "when" => Some(self.parse_when()),
            "try" => Some(self.parse_try()),
            "object" => Some(self.parse_type_decl(false)),
            "fun" => Some(self.parse_function()),
            "return" | "throw" | "break" | "continue" => {
                self.bump();
                if self.peek().kind == Tok::AtIdent && !self.peek().ws_before {
                    self.bump();
                }
                let mut children = Vec::new();
                if matches!(word, "return" | "throw")
                    && !self.at_stmt_end()
                    && !self.at_op(")")
                    && !self.at_op(",")
                    && !self.at_op("]")
                    && !self.at_op("->")
                {
                    children.extend(self.parse_expr());
                }
                Some(RawNode::spanning(K::OTHER, t.start, self.prev_end(), children).with_aux(word))
            }
            w if NOT_EXPR_START.contains(&w) => None,
            _ => {
                self.bump();
                Some(RawNode::leaf_aux(K::IDENTIFIER, t.start, t.end, self.ident_name(t)))
            }
        }
    }

    fn parse_if(&mut self) -> RawNode {
        let kw = self.bump();
        let mut children = Vec::new();
        self.parse_paren_condition(&mut children);
        if !self.at_kw("else") {
            if let Some(then) = self.parse_control_body() {
                children.push(then);
            }
        }
        let semi_else = self.at_op(";") && {
            let n = self.peek_at(1);
            n.kind == Tok::Ident && self.text(n) == "else"
        };
        if semi_else {
            self.bump();
        }
        if self.at_kw("else") {
            self.bump();
            if let Some(otherwise) = self.parse_control_body() {
                children.push(otherwise);
            }
        }
        RawNode::spanning(K::IF_STMT, kw.start, self.prev_end(), children)
    }

    fn parse_when(&mut self) -> RawNode {
        let kw = self.bump();
        let mut children = Vec::new();
        if self.at_op("(") {
            self.bump();
            self.with_nl(true, |p| {
                if p.at_kw("val") {
                    children.push(p.parse_property());
                } else if let Some(subject) = p.parse_expr() {
                    children.push(subject);
                }
                p.close_paren(&mut children);
            });
        }
        if self.at_op("{") {
            self.bump();
            self.with_nl(false, |p| p.parse_when_entries(&mut children));
            if self.at_op("}") {
                self.bump();
            } else {
                let at = self.peek().start;
                self.diag(at, "missing `}` after `when` entries");
            }
        } else {
            let at = self.peek().start;
            self.diag(at, "expected `{` after `when`");
        }
        RawNode::spanning(K::WHEN_STMT, kw.start, self.prev_end(), children)
    }

    fn parse_when_entries(&mut self, out: &mut Vec<RawNode>) {
        loop {
            while self.at_op(";") {
                self.bump();
            }
            if self.at_eof() || self.at_op("}") {
                return;
            }
            let before = self.pos;
            let start = self.peek().start;
            let mut children = Vec::new();
            if self.at_kw("else") {
                self.bump();
            } else {
                loop {
                    let t = self.peek();
                    let negated = self.is_op(t, "!")
                        && self.peek_at(1).kind == Tok::Ident
                        && matches!(self.text(self.peek_at(1)), "in" | "is");
                    let kw = if negated { self.peek_at(1) } else { t };
                    if kw.kind == Tok::Ident && matches!(self.text(kw), "in" | "is") {
                        let word = self.text(kw);
                        if negated {
                            self.bump();
                        }
                        self.bump();
                        let aux = if negated { format!("!{word}") } else { word.to_string() };
                        let mut inner = Vec::new();
                        if word == "in" {
                            inner.extend(self.parse_expr());
                        } else {
                            self.skip_type();
                        }
                        children.push(RawNode::spanning(K::OTHER, t.start, self.prev_end(), inner).with_aux(aux));
                    } else {
                        match self.parse_expr() {
                            Some(e) => children.push(e),
                            None => break,
                        }
                    }
                    if self.at_op(",") {
                        self.bump();
                        continue;
                    }
                    break;
                }
            }
            if self.at_op("->") {
                self.bump();
                if let Some(body) = self.parse_control_body() {
                    children.push(body);
                }
                out.push(RawNode::spanning(K::OTHER, start, self.prev_end(), children).with_aux("when_entry"));
            } else {
                out.extend(children);
                let junk = self.recover("expected `->` in `when` entry");
                out.push(junk);
                continue;
            }
            if !self.at_stmt_end() {
                let junk = self.recover("unexpected token after `when` entry");
                out.push(junk);
            } else if self.pos == before {
                let junk = self.recover("expected a `when` entry");
                out.push(junk);
            }
        }
    }

    fn parse_try(&mut self) -> RawNode {
        let kw = self.bump();
        let mut children = Vec::new();
        if self.at_op("{") {
            children.push(self.parse_block());
        }
        loop {
            if self.at_kw("catch") {
                self.bump();
                if self.at_op("(") {
                    self.skip_balanced();
                }
                if self.at_op("{") {
                    children.push(self.parse_block());
                }
            } else if self.at_kw("finally") {
                self.bump();
                if self.at_op("{") {
                    children.push(self.parse_block());
                }
            } else {
                break;
            }
        }
        RawNode::spanning(K::OTHER, kw.start, self.prev_end(), children).with_aux("try")
    }
}
