//! Recursive-descent parser for the Python 3 subset analyzers rely on.

use super::lexer::{Tok, Token};
use crate::cst::NodeKind as K;
use crate::frontends::raw::{LineIndex, RawNode};

const MAX_DEPTH: usize = 150;
const MAX_CHAIN: usize = 2_000;

const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue", "def", "del",
    "elif", "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda", "nonlocal",
    "not", "or", "pass", "raise", "return", "try", "while", "with", "yield",
];

const AUG_ASSIGN: &[&str] = &["+=", "-=", "*=", "/=", "//=", "%=", "**=", "@=", "&=", "|=", "^=", ">>=", "<<="];

pub(crate) struct Parser<'s> {
    src: &'s str,
    toks: Vec<Token>,
    pos: usize,
    pub diags: Vec<String>,
    lines: LineIndex,
    depth: usize,
}

struct Clause {
    start: usize,
    cond: Option<RawNode>,
    body: RawNode,
}

impl<'s> Parser<'s> {
    pub fn new(src: &'s str, toks: Vec<Token>) -> Self {
        Parser { src, toks, pos: 0, diags: Vec::new(), lines: LineIndex::new(src), depth: 0 }
    }

    pub fn parse_file(&mut self) -> RawNode {
        let mut stmts = Vec::new();
        loop {
            stmts.extend(self.parse_statements());
            match self.peek().kind {
                Tok::Eof => break,
                Tok::Indent => {
                    let at = self.peek().start;
                    self.diag(at, "unexpected indent");
                    self.bump();
                }
                _ => {
                    self.bump();
                }
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

    fn at(&self, kind: Tok) -> bool {
        self.peek().kind == kind
    }

    fn at_op(&self, op: &str) -> bool {
        let t = self.peek();
        t.kind == Tok::Op && self.text(t) == op
    }

    fn at_kw(&self, kw: &str) -> bool {
        let t = self.peek();
        t.kind == Tok::Name && self.text(t) == kw
    }

    fn bump(&mut self) -> Token {
        let t = self.peek();
        if t.kind != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    /// End of the last consumed token that has a nonzero width.
    fn prev_end(&self) -> usize {
        self.toks[..self.pos]
            .iter()
            .rev()
            .find(|t| !matches!(t.kind, Tok::Newline | Tok::Indent | Tok::Dedent))
            .map_or(0, |t| t.end)
    }

    fn diag(&mut self, at: usize, msg: &str) {
        let line = self.lines.line(at);
        let col = self.lines.column(at);
        self.diags.push(format!("{line}:{col}: {msg}"));
    }

    fn at_line_end(&self) -> bool {
        matches!(self.peek().kind, Tok::Newline | Tok::Eof | Tok::Dedent | Tok::Indent) || self.at_op(";")
    }

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

    /// Skips the rest of the logical line as an error region.
    fn recover(&mut self, msg: &str) -> RawNode {
        let start = self.peek().start;
        self.diag(start, msg);
        while !matches!(self.peek().kind, Tok::Newline | Tok::Eof | Tok::Indent | Tok::Dedent) {
            self.skip_balanced();
        }
        RawNode::leaf(K::OTHER, start, self.prev_end().max(start)).with_aux("error")
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

    /// Statements up to a DEDENT (left unconsumed) or end of file.
    fn parse_statements(&mut self) -> Vec<RawNode> {
        let mut out = Vec::new();
        loop {
            match self.peek().kind {
                Tok::Eof | Tok::Dedent => return out,
                Tok::Newline => {
                    self.bump();
                }
                Tok::Indent => {
                    let at = self.peek().start;
                    self.diag(at, "unexpected indent");
                    self.bump();
                    let inner = self.parse_statements();
                    if self.at(Tok::Dedent) {
                        self.bump();
                    }
                    if !inner.is_empty() {
                        out.push(RawNode::wrap(K::OTHER, inner).with_aux("error"));
                    }
                }
                _ => {
                    let before = self.pos;
                    out.extend(self.parse_statement());
                    if self.pos == before {
                        let junk = self.recover("expected a statement");
                        out.push(junk);
                        if self.pos == before {
                            self.bump();
                        }
                    }
                }
            }
        }
    }

    fn parse_statement(&mut self) -> Vec<RawNode> {
        if let Some(deep) = self.too_deep() {
            return vec![deep];
        }
        self.depth += 1;
        let out = self.parse_statement_inner();
        self.depth -= 1;
        out
    }

    fn parse_statement_inner(&mut self) -> Vec<RawNode> {
        let t = self.peek();
        if t.kind == Tok::Name {
            let compound = match self.text(t) {
                "if" => Some(self.parse_if()),
                "while" => Some(self.parse_while()),
                "for" => Some(self.parse_for()),
                "def" => Some(self.parse_def()),
                "class" => Some(self.parse_class()),
                "try" => Some(self.parse_try()),
                "with" => Some(self.parse_with()),
                "async" if matches!(self.text(self.peek_at(1)), "def" | "for" | "with") => {
                    self.bump();
                    let mut node = self.parse_statement_inner();
                    if let Some(first) = node.first_mut() {
                        first.start = t.start;
                    }
                    return node;
                }
                "match" | "case" if self.soft_keyword_header() => Some(self.parse_generic_compound()),
                _ => None,
            };
            if let Some(node) = compound {
                return vec![node];
            }
        }
        if self.at_op("@") {
            let at = self.bump();
            let mut children = Vec::new();
            children.extend(self.parse_expr());
            let node = RawNode::spanning(K::OTHER, at.start, self.prev_end(), children).with_aux("decorator");
            self.end_simple_line();
            return vec![node];
        }
        self.parse_simple_line()
    }

    /// Consumes the NEWLINE after a simple statement, recovering from junk.
    fn end_simple_line(&mut self) -> Option<RawNode> {
        let junk = if self.at_line_end() { None } else { Some(self.recover("unexpected token")) };
        if self.at(Tok::Newline) {
            self.bump();
        }
        junk
    }

    /// `stmt; stmt; stmt NEWLINE`
    fn parse_simple_line(&mut self) -> Vec<RawNode> {
        let mut out = Vec::new();
        loop {
            let before = self.pos;
            if let Some(s) = self.parse_simple() {
                out.push(s);
            }
            if self.at_op(";") {
                self.bump();
                if !self.at_line_end() {
                    continue;
                }
            }
            if self.pos == before && !self.at_line_end() {
                out.push(self.recover("expected a statement"));
            }
            break;
        }
        out.extend(self.end_simple_line());
        out
    }

    fn parse_simple(&mut self) -> Option<RawNode> {
        let t = self.peek();
        if t.kind == Tok::Name {
            let word = self.text(t);
            match word {
                "pass" | "break" | "continue" => {
                    self.bump();
                    return Some(RawNode::leaf_aux(K::OTHER, t.start, t.end, word));
                }
                "import" | "from" | "global" | "nonlocal" => {
                    self.bump();
                    while !self.at_line_end() {
                        self.skip_balanced();
                    }
                    return Some(RawNode::leaf_aux(K::OTHER, t.start, self.prev_end(), word));
                }
                "return" | "del" | "raise" | "assert" => {
                    self.bump();
                    let mut children = Vec::new();
                    if !self.at_line_end() {
                        children.extend(self.parse_expr_list());
                        if word == "raise" && self.at_kw("from") {
                            self.bump();
                            children.extend(self.parse_expr());
                        }
                    }
                    return Some(RawNode::spanning(K::OTHER, t.start, self.prev_end(), children).with_aux(word));
                }
                _ => {}
            }
        }
        let first = self.parse_expr_list()?;
        let op = self.peek();
        let op_text = self.text(op);
        if op.kind == Tok::Op && (op_text == "=" || op_text == ":" || AUG_ASSIGN.contains(&op_text)) {
            let mut children = vec![first];
            let mut aux = op_text.to_string();
            while self.at_op("=") || self.at_op(":") || AUG_ASSIGN.contains(&self.text(self.peek())) {
                let sep = self.bump();
                if self.text(sep) == ":" {
                    aux = ":".into();
                }
                if self.at_line_end() {
                    break;
                }
                match self.parse_expr_list() {
                    Some(e) => children.push(e),
                    None => break,
                }
            }
            return Some(RawNode::wrap(K::OTHER, children).with_aux(aux));
        }
        Some(first)
    }

    /// Whether the logical line starting at `match`/`case` is a compound
    /// header (ends in `:` at bracket depth 0) rather than a plain name.
    fn soft_keyword_header(&self) -> bool {
        let next = self.peek_at(1);
        if next.kind == Tok::Op && matches!(self.text(next), "=" | "." | "," | ")" | ":" | ";") {
            return false;
        }
        if matches!(next.kind, Tok::Newline | Tok::Eof) {
            return false;
        }
        let mut i = self.pos + 1;
        let mut last = None;
        while let Some(t) = self.toks.get(i) {
            if matches!(t.kind, Tok::Newline | Tok::Eof) {
                break;
            }
            last = Some(*t);
            i += 1;
        }
        last.is_some_and(|t| t.kind == Tok::Op && self.text(t) == ":")
    }

    /// `kw header: suite` with the header kept opaque, e.g. `match`/`case`.
    fn parse_generic_compound(&mut self) -> RawNode {
        let kw = self.bump();
        let word = self.text(kw).to_string();
        let mut children = Vec::new();
        let header_start = self.peek().start;
        let mut depth = 0usize;
        while !self.at_line_end() {
            if depth == 0 && self.at_op(":") && matches!(self.peek_at(1).kind, Tok::Newline | Tok::Eof) {
                break;
            }
            let t = self.bump();
            if t.kind == Tok::Op {
                match self.text(t) {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => depth = depth.saturating_sub(1),
                    _ => {}
                }
            }
        }
        if self.prev_end() > header_start {
            children.push(RawNode::leaf_aux(K::OTHER, header_start, self.prev_end(), "header"));
        }
        children.push(self.parse_suite());
        RawNode::spanning(K::OTHER, kw.start, self.prev_end(), children).with_aux(word)
    }

    /// `: suite` as an indented block or statements on the same line.
    fn parse_suite(&mut self) -> RawNode {
        if self.at_op(":") {
            self.bump();
        } else {
            let at = self.peek().start;
            self.diag(at, "expected `:`");
            while !self.at_line_end() && !self.at_op(":") {
                self.skip_balanced();
            }
            if self.at_op(":") {
                self.bump();
            }
        }
        if self.at(Tok::Newline) {
            self.bump();
            if self.at(Tok::Indent) {
                self.bump();
                let stmts = self.parse_statements();
                if self.at(Tok::Dedent) {
                    self.bump();
                }
                return self.block(stmts);
            }
            let at = self.peek().start;
            self.diag(at, "expected an indented block");
            return self.block(Vec::new());
        }
        let stmts = self.parse_simple_line();
        self.block(stmts)
    }

    fn block(&self, stmts: Vec<RawNode>) -> RawNode {
        if stmts.is_empty() {
            let at = self.prev_end();
            return RawNode::spanning(K::BLOCK, at, at, stmts);
        }
        RawNode::wrap(K::BLOCK, stmts)
    }

    fn parse_condition(&mut self) -> Option<RawNode> {
        let cond = self.parse_named_expr();
        if cond.is_none() {
            let at = self.peek().start;
            self.diag(at, "expected condition");
        }
        cond
    }

    fn parse_if(&mut self) -> RawNode {
        let mut clauses = Vec::new();
        let kw = self.bump();
        let cond = self.parse_condition();
        let body = self.parse_suite();
        clauses.push(Clause { start: kw.start, cond, body });
        while self.at_kw("elif") {
            let kw = self.bump();
            let cond = self.parse_condition();
            let body = self.parse_suite();
            clauses.push(Clause { start: kw.start, cond, body });
        }
        let mut tail = None;
        if self.at_kw("else") {
            self.bump();
            tail = Some(self.parse_suite());
        }
        let end = self.prev_end();
        // `elif` chains nest: each clause owns the remaining ones.
        while let Some(clause) = clauses.pop() {
            let mut children = Vec::new();
            children.extend(clause.cond);
            children.push(clause.body);
            children.extend(tail.take());
            tail = Some(RawNode::spanning(K::IF_STMT, clause.start, end, children));
        }
        tail.expect("at least one clause")
    }

    fn parse_while(&mut self) -> RawNode {
        let kw = self.bump();
        let mut children = Vec::new();
        children.extend(self.parse_condition());
        children.push(self.parse_suite());
        if self.at_kw("else") {
            self.bump();
            children.push(self.parse_suite());
        }
        RawNode::spanning(K::WHILE_STMT, kw.start, self.prev_end(), children)
    }

    fn parse_for(&mut self) -> RawNode {
        let kw = self.bump();
        let mut children = Vec::new();
        children.extend(self.parse_target_list());
        if self.at_kw("in") {
            self.bump();
            children.extend(self.parse_expr_list());
        } else {
            let at = self.peek().start;
            self.diag(at, "expected `in`");
        }
        children.push(self.parse_suite());
        if self.at_kw("else") {
            self.bump();
            children.push(self.parse_suite());
        }
        RawNode::spanning(K::FOR_STMT, kw.start, self.prev_end(), children)
    }

    /// Loop/comprehension targets: expressions above comparison level, so
    /// the following `in` is not swallowed.
    fn parse_target_list(&mut self) -> Option<RawNode> {
        let mut items = Vec::new();
        loop {
            let item = if self.at_op("*") {
                let star = self.bump();
                let inner = self.parse_bitor();
                Some(
                    RawNode::spanning(K::OTHER, star.start, self.prev_end(), inner.into_iter().collect()).with_aux("*"),
                )
            } else {
                self.parse_bitor()
            };
            match item {
                Some(i) => items.push(i),
                None => break,
            }
            if self.at_op(",") {
                self.bump();
                continue;
            }
            break;
        }
        match items.len() {
            0 => None,
            1 => items.pop(),
            _ => Some(RawNode::wrap(K::OTHER, items).with_aux("tuple")),
        }
    }

    fn parse_def(&mut self) -> RawNode {
        let kw = self.bump();
        let mut children = Vec::new();
        let mut name = None;
        if self.at(Tok::Name) {
            let n = self.bump();
            name = Some(self.text(n).to_string());
            children.push(RawNode::leaf_aux(K::IDENTIFIER, n.start, n.end, self.text(n)));
        } else {
            let at = self.peek().start;
            self.diag(at, "expected function name");
        }
        if self.at_op("[") {
            self.skip_balanced();
        }
        if self.at_op("(") {
            self.bump();
            let mut depth = 0usize;
            loop {
                if self.at(Tok::Eof) {
                    break;
                }
                if depth == 0 && self.at_op(")") {
                    self.bump();
                    break;
                }
                if depth == 0 && self.at_op("=") {
                    self.bump();
                    children.extend(self.parse_expr());
                    continue;
                }
                if self.at_op("(") || self.at_op("[") || self.at_op("{") {
                    depth += 1;
                } else if self.at_op(")") || self.at_op("]") || self.at_op("}") {
                    depth = depth.saturating_sub(1);
                }
                self.bump();
            }
        } else {
            let at = self.peek().start;
            self.diag(at, "expected `(`");
        }
        if self.at_op("->") {
            self.bump();
            self.parse_expr();
        }
        children.push(self.parse_suite());
        let mut node = RawNode::spanning(K::FUNCTION_DECL, kw.start, self.prev_end(), children);
        node.aux = name;
        node
    }

    fn parse_class(&mut self) -> RawNode {
        let kw = self.bump();
        let mut children = Vec::new();
        if self.at(Tok::Name) {
            let n = self.bump();
            children.push(RawNode::leaf_aux(K::IDENTIFIER, n.start, n.end, self.text(n)));
        }
        if self.at_op("[") {
            self.skip_balanced();
        }
        if self.at_op("(") {
            children.extend(self.parse_bracket_contents());
        }
        children.push(self.parse_suite());
        RawNode::spanning(K::OTHER, kw.start, self.prev_end(), children).with_aux("class")
    }

    fn parse_try(&mut self) -> RawNode {
        let kw = self.bump();
        let mut children = vec![self.parse_suite()];
        loop {
            if self.at_kw("except") {
                let ex = self.bump();
                let mut inner = Vec::new();
                if self.at_op("*") {
                    self.bump();
                }
                if !self.at_op(":") {
                    inner.extend(self.parse_expr_list());
                    if self.at_kw("as") {
                        self.bump();
                        if self.at(Tok::Name) {
                            self.bump();
                        }
                    }
                }
                inner.push(self.parse_suite());
                children.push(RawNode::spanning(K::OTHER, ex.start, self.prev_end(), inner).with_aux("except"));
            } else if self.at_kw("else") || self.at_kw("finally") {
                self.bump();
                children.push(self.parse_suite());
            } else {
                break;
            }
        }
        RawNode::spanning(K::OTHER, kw.start, self.prev_end(), children).with_aux("try")
    }

    fn parse_with(&mut self) -> RawNode {
        let kw = self.bump();
        let mut children = Vec::new();
        loop {
            if let Some(e) = self.parse_expr() {
                children.push(e);
            }
            if self.at_kw("as") {
                self.bump();
                children.extend(self.parse_target_list());
            }
            if self.at_op(",") {
                self.bump();
                continue;
            }
            break;
        }
        children.push(self.parse_suite());
        RawNode::spanning(K::OTHER, kw.start, self.prev_end(), children).with_aux("with")
    }

    // ---- expressions ---------------------------------------------------

    /// Comma-separated expressions; more than one becomes a tuple node.
    fn parse_expr_list(&mut self) -> Option<RawNode> {
        let mut items = Vec::new();
        loop {
            let item = if self.at_op("*") {
                let star = self.bump();
                let inner = self.parse_bitor();
                Some(
                    RawNode::spanning(K::OTHER, star.start, self.prev_end(), inner.into_iter().collect()).with_aux("*"),
                )
            } else if self.at_kw("yield") {
                Some(self.parse_yield())
            } else {
                self.parse_named_expr()
            };
            match item {
                Some(i) => items.push(i),
                None => break,
            }
            if self.at_op(",") {
                self.bump();
                continue;
            }
            break;
        }
        match items.len() {
            0 => None,
            1 => items.pop(),
            _ => {
                let mut node = RawNode::wrap(K::OTHER, items).with_aux("tuple");
                node.end = node.end.max(self.prev_end());
                Some(node)
            }
        }
    }

    fn parse_yield(&mut self) -> RawNode {
        let kw = self.bump();
        if self.at_kw("from") {
            self.bump();
        }
        let mut children = Vec::new();
        if !self.at_line_end() && !self.at_op(")") && !self.at_op("]") && !self.at_op("}") && !self.at_op("=") {
            children.extend(self.parse_expr_list());
        }
        RawNode::spanning(K::OTHER, kw.start, self.prev_end(), children).with_aux("yield")
    }

    fn parse_named_expr(&mut self) -> Option<RawNode> {
        if self.at(Tok::Name) && self.peek_at(1).kind == Tok::Op && self.text(self.peek_at(1)) == ":=" {
            let n = self.bump();
            self.bump();
            let target = RawNode::leaf_aux(K::IDENTIFIER, n.start, n.end, self.text(n));
            let mut children = vec![target];
            children.extend(self.parse_expr());
            return Some(RawNode::wrap(K::OTHER, children).with_aux(":="));
        }
        self.parse_expr()
    }

    pub fn parse_expr(&mut self) -> Option<RawNode> {
        if let Some(deep) = self.too_deep() {
            return Some(deep);
        }
        self.depth += 1;
        let node = self.parse_test();
        self.depth -= 1;
        node
    }

    fn parse_test(&mut self) -> Option<RawNode> {
        if self.at_kw("lambda") {
            return Some(self.parse_lambda());
        }
        let body = self.parse_or()?;
        if self.at_kw("if") {
            // `a if c else b`; in comprehensions the caller stops at `if`
            // by calling `parse_or` directly.
            self.bump();
            let mut children = vec![body];
            children.extend(self.parse_or());
            if self.at_kw("else") {
                self.bump();
                children.extend(self.parse_expr());
            } else {
                let at = self.peek().start;
                self.diag(at, "expected `else` in conditional expression");
            }
            let mut node = RawNode::wrap(K::OTHER, children).with_aux("ifexp");
            node.end = node.end.max(self.prev_end());
            return Some(node);
        }
        Some(body)
    }

    fn parse_lambda(&mut self) -> RawNode {
        let kw = self.bump();
        let mut children = Vec::new();
        while !self.at_op(":") && !self.at_line_end() && !self.at_op(")") {
            if self.at_op("=") {
                self.bump();
                children.extend(self.parse_expr());
                continue;
            }
            self.skip_balanced();
        }
        if self.at_op(":") {
            self.bump();
            children.extend(self.parse_expr());
        } else {
            let at = self.peek().start;
            self.diag(at, "expected `:` in lambda");
        }
        RawNode::spanning(K::LAMBDA, kw.start, self.prev_end(), children)
    }

    fn op_node(&self, t: Token, aux: &str) -> RawNode {
        RawNode::leaf_aux(K::OPERATOR_TOKEN, t.start, t.end, aux)
    }

    fn binary(&self, lhs: RawNode, op: RawNode, rhs: Option<RawNode>) -> RawNode {
        let aux = op.aux.clone().unwrap_or_default();
        let mut children = vec![lhs, op];
        children.extend(rhs);
        RawNode::wrap(K::BINARY_EXPR, children).with_aux(aux)
    }

    fn missing_operand(&mut self, op: &str) {
        let at = self.peek().start;
        self.diag(at, &format!("expected right operand of `{op}`"));
    }

    fn parse_or(&mut self) -> Option<RawNode> {
        self.parse_bool_chain("or")
    }

    fn parse_bool_chain(&mut self, word: &str) -> Option<RawNode> {
        let mut lhs = if word == "or" { self.parse_bool_chain("and")? } else { self.parse_not()? };
        let mut chain = 0;
        while self.at_kw(word) && chain < MAX_CHAIN {
            chain += 1;
            let t = self.bump();
            let rhs = if word == "or" { self.parse_bool_chain("and") } else { self.parse_not() };
            if rhs.is_none() {
                self.missing_operand(word);
            }
            lhs = self.binary(lhs, self.op_node(t, word), rhs);
        }
        Some(lhs)
    }

    fn parse_not(&mut self) -> Option<RawNode> {
        if self.at_kw("not") {
            if let Some(deep) = self.too_deep() {
                return Some(deep);
            }
            let t = self.bump();
            self.depth += 1;
            let operand = self.parse_not();
            self.depth -= 1;
            let mut children = vec![self.op_node(t, "not")];
            match operand {
                Some(o) => children.push(o),
                None => self.missing_operand("not"),
            }
            return Some(RawNode::wrap(K::UNARY_EXPR, children).with_aux("not"));
        }
        self.parse_comparison()
    }

    /// Comparison operator at the cursor and its token count.
    fn comparison_op(&self) -> Option<(String, usize)> {
        let t = self.peek();
        match (t.kind, self.text(t)) {
            (Tok::Op, op @ ("<" | ">" | "==" | ">=" | "<=" | "!=")) => Some((op.to_string(), 1)),
            (Tok::Name, "in") => Some(("in".into(), 1)),
            (Tok::Name, "not") if self.text(self.peek_at(1)) == "in" && self.peek_at(1).kind == Tok::Name => {
                Some(("not in".into(), 2))
            }
            (Tok::Name, "is") => {
                let n = self.peek_at(1);
                if n.kind == Tok::Name && self.text(n) == "not" {
                    Some(("is not".into(), 2))
                } else {
                    Some(("is".into(), 1))
                }
            }
            _ => None,
        }
    }

    fn parse_comparison(&mut self) -> Option<RawNode> {
        let first = self.parse_bitor()?;
        let mut parts = vec![first];
        let mut ops = 0;
        while let Some((op, n)) = self.comparison_op() {
            if ops >= MAX_CHAIN {
                break;
            }
            ops += 1;
            let start = self.peek().start;
            for _ in 0..n {
                self.bump();
            }
            let end = self.prev_end();
            parts.push(RawNode::leaf_aux(K::OPERATOR_TOKEN, start, end, &op));
            match self.parse_bitor() {
                Some(rhs) => parts.push(rhs),
                None => {
                    self.missing_operand(&op);
                    break;
                }
            }
        }
        Some(match ops {
            0 => parts.pop().expect("one operand"),
            1 => {
                let aux = parts[1].aux.clone().unwrap_or_default();
                RawNode::wrap(K::BINARY_EXPR, parts).with_aux(aux)
            }
            _ => RawNode::wrap(K::OTHER, parts).with_aux("compare_chain"),
        })
    }

    fn parse_left_assoc(&mut self, ops: &[&str], next: fn(&mut Self) -> Option<RawNode>) -> Option<RawNode> {
        let mut lhs = next(self)?;
        let mut chain = 0;
        loop {
            let t = self.peek();
            if t.kind != Tok::Op || !ops.contains(&self.text(t)) || chain >= MAX_CHAIN {
                return Some(lhs);
            }
            chain += 1;
            self.bump();
            let op = self.text(t);
            let rhs = next(self);
            if rhs.is_none() {
                self.missing_operand(op);
            }
            lhs = self.binary(lhs, self.op_node(t, op), rhs);
        }
    }

    fn parse_bitor(&mut self) -> Option<RawNode> {
        self.parse_left_assoc(&["|"], Self::parse_bitxor)
    }

    fn parse_bitxor(&mut self) -> Option<RawNode> {
        self.parse_left_assoc(&["^"], Self::parse_bitand)
    }

    fn parse_bitand(&mut self) -> Option<RawNode> {
        self.parse_left_assoc(&["&"], Self::parse_shift)
    }

    fn parse_shift(&mut self) -> Option<RawNode> {
        self.parse_left_assoc(&["<<", ">>"], Self::parse_arith)
    }

    fn parse_arith(&mut self) -> Option<RawNode> {
        self.parse_left_assoc(&["+", "-"], Self::parse_term)
    }

    fn parse_term(&mut self) -> Option<RawNode> {
        self.parse_left_assoc(&["*", "/", "//", "%", "@"], Self::parse_factor)
    }

    fn parse_factor(&mut self) -> Option<RawNode> {
        let t = self.peek();
        if t.kind == Tok::Op && matches!(self.text(t), "+" | "-" | "~") {
            if let Some(deep) = self.too_deep() {
                return Some(deep);
            }
            self.bump();
            let op = self.text(t);
            self.depth += 1;
            let operand = self.parse_factor();
            self.depth -= 1;
            let mut children = vec![self.op_node(t, op)];
            match operand {
                Some(o) => children.push(o),
                None => self.missing_operand(op),
            }
            return Some(RawNode::wrap(K::UNARY_EXPR, children).with_aux(op));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Option<RawNode> {
        let base = if self.at_kw("await") {
            let kw = self.bump();
            let inner = self.parse_primary();
            RawNode::spanning(K::OTHER, kw.start, self.prev_end(), inner.into_iter().collect()).with_aux("await")
        } else {
            self.parse_primary()?
        };
        if self.at_op("**") {
            let t = self.bump();
            let rhs = self.parse_factor();
            if rhs.is_none() {
                self.missing_operand("**");
            }
            return Some(self.binary(base, self.op_node(t, "**"), rhs));
        }
        Some(base)
    }

    fn parse_primary(&mut self) -> Option<RawNode> {
        let mut lhs = self.parse_atom()?;
        let mut chain = 0;
        while chain < MAX_CHAIN {
            chain += 1;
            if self.at_op("(") {
                let callee = match lhs.kind {
                    K::IDENTIFIER => lhs.aux.clone(),
                    K::OTHER => lhs.aux.as_deref().and_then(|a| a.strip_prefix('.')).map(str::to_string),
                    _ => None,
                };
                let mut children = vec![lhs];
                children.extend(self.parse_bracket_contents());
                let mut node = RawNode::wrap(K::CALL_EXPR, children);
                node.end = self.prev_end();
                node.aux = callee;
                lhs = node;
            } else if self.at_op("[") {
                let mut children = vec![lhs];
                children.extend(self.parse_bracket_contents());
                let mut node = RawNode::wrap(K::OTHER, children).with_aux("[]");
                node.end = self.prev_end();
                lhs = node;
            } else if self.at_op(".") && self.peek_at(1).kind == Tok::Name {
                self.bump();
                let n = self.bump();
                let name = self.text(n);
                let name_node = RawNode::leaf_aux(K::IDENTIFIER, n.start, n.end, name);
                lhs = RawNode::wrap(K::OTHER, vec![lhs, name_node]).with_aux(format!(".{name}"));
            } else {
                break;
            }
        }
        Some(lhs)
    }

    fn parse_atom(&mut self) -> Option<RawNode> {
        let t = self.peek();
        match t.kind {
            Tok::Int => {
                self.bump();
                Some(RawNode::leaf(K::INT_LITERAL, t.start, t.end))
            }
            Tok::Float => {
                self.bump();
                Some(RawNode::leaf_aux(K::OTHER, t.start, t.end, "number"))
            }
            Tok::Str => {
                self.bump();
                while self.at(Tok::Str) {
                    self.bump();
                }
                Some(RawNode::leaf(K::STRING_LITERAL, t.start, self.prev_end()))
            }
            Tok::Name => {
                let word = self.text(t);
                match word {
                    "True" | "False" => {
                        self.bump();
                        Some(RawNode::leaf_aux(K::BOOL_LITERAL, t.start, t.end, word))
                    }
                    "None" => {
                        self.bump();
                        Some(RawNode::leaf_aux(K::OTHER, t.start, t.end, "None"))
                    }
                    // Soft keywords are ordinary names in expressions.
                    w if KEYWORDS.contains(&w) => None,
                    _ => {
                        self.bump();
                        Some(RawNode::leaf_aux(K::IDENTIFIER, t.start, t.end, word))
                    }
                }
            }
            Tok::Op => match self.text(t) {
                "(" => Some(self.parse_paren()),
                "[" => {
                    let children = self.parse_bracket_contents();
                    Some(RawNode::spanning(K::OTHER, t.start, self.prev_end(), children).with_aux("list"))
                }
                "{" => {
                    let children = self.parse_bracket_contents();
                    Some(RawNode::spanning(K::OTHER, t.start, self.prev_end(), children).with_aux("dict"))
                }
                "..." => {
                    self.bump();
                    Some(RawNode::leaf_aux(K::OTHER, t.start, t.end, "..."))
                }
                _ => None,
            },
            _ => None,
        }
    }

    /// `( expr )` is a parenthesized expression; anything else in parens
    /// (tuples, generator expressions) is `OTHER`.
    fn parse_paren(&mut self) -> RawNode {
        let open = self.bump();
        let mut out = Vec::new();
        if !self.at_kw("yield") && !self.at_op(")") {
            if let Some(inner) = self.parse_named_expr() {
                if self.at_op(")") {
                    self.bump();
                    return RawNode::spanning(K::PAREN_EXPR, open.start, self.prev_end(), vec![inner]);
                }
                out.push(inner);
            }
        }
        self.parse_bracket_rest(open, &mut out);
        RawNode::spanning(K::OTHER, open.start, self.prev_end(), out).with_aux("tuple")
    }

    /// Tolerant parse of `(...)`, `[...]` or `{...}` contents: arguments,
    /// elements, slices, keyword arguments and comprehension clauses.
    fn parse_bracket_contents(&mut self) -> Vec<RawNode> {
        let open = self.bump();
        let mut out = Vec::new();
        self.parse_bracket_rest(open, &mut out);
        out
    }

    fn parse_bracket_rest(&mut self, open: Token, out: &mut Vec<RawNode>) {
        let close = match self.text(open) {
            "(" => ")",
            "[" => "]",
            _ => "}",
        };
        loop {
            let t = self.peek();
            if t.kind == Tok::Eof {
                self.diag(open.start, &format!("missing `{close}`"));
                break;
            }
            if t.kind == Tok::Op && matches!(self.text(t), ")" | "]" | "}") {
                if self.text(t) != close {
                    self.diag(t.start, &format!("expected `{close}`"));
                }
                self.bump();
                break;
            }
            match (t.kind, self.text(t)) {
                (Tok::Op, "," | ":" | "=" | ":=")
                | (Tok::Name, "as")
                | (Tok::Newline | Tok::Indent | Tok::Dedent, _) => {
                    self.bump();
                }
                (Tok::Op, "*" | "**") => {
                    self.bump();
                    let inner = self.parse_expr();
                    out.push(
                        RawNode::spanning(K::OTHER, t.start, self.prev_end(), inner.into_iter().collect())
                            .with_aux(self.text(t)),
                    );
                }
                (Tok::Name, "for" | "async") => {
                    self.bump();
                    if self.at_kw("for") {
                        self.bump();
                    }
                    out.extend(self.parse_target_list());
                    if self.at_kw("in") {
                        self.bump();
                        out.extend(self.parse_or());
                    }
                }
                (Tok::Name, "if") => {
                    self.bump();
                    out.extend(self.parse_or());
                }
                (Tok::Name, "yield") => out.push(self.parse_yield()),
                (Tok::Name, _) if self.peek_at(1).kind == Tok::Op && self.text(self.peek_at(1)) == "=" => {
                    // keyword argument name
                    self.bump();
                }
                _ => match self.parse_expr() {
                    Some(e) => out.push(e),
                    None => {
                        self.diag(t.start, "unexpected token in brackets");
                        self.skip_balanced();
                        out.push(RawNode::leaf(K::OTHER, t.start, self.prev_end()).with_aux("error"));
                    }
                },
            }
        }
    }
}
