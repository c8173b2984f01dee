//! Kotlin tokenizer. Whitespace and comments are not tokens; each token
//! records whether whitespace or a line break preceded it, which is all the
//! parser needs for Kotlin's newline-sensitive statement rules.

use crate::frontends::raw::LineIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident,
    Int,
    Float,
    Str,
    Op,
    /// `@name`: an annotation, or a label reference after `return` etc.
    AtIdent,
    /// `name@`: a label definition.
    LabelDef,
    Eof,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Token {
    pub kind: Tok,
    pub start: usize,
    pub end: usize,
    pub nl_before: bool,
    pub ws_before: bool,
}

pub(crate) struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<(usize, usize)>,
    pub diagnostics: Vec<String>,
}

const OPS3: [&str; 3] = ["===", "!==", "..<"];
const OPS2: [&str; 19] =
    ["?.", "?:", "::", "..", "->", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "!!"];
const OPS1: &str = "+-*/%=<>!()[]{},.;:?@#&|~^$\\";

const LABEL_KEYWORDS: [&str; 5] = ["return", "break", "continue", "this", "super"];

struct Lexer<'s> {
    src: &'s str,
    bytes: &'s [u8],
    pos: usize,
    out: Lexed,
    lines: LineIndex,
}

pub(crate) fn lex(src: &str) -> Lexed {
    let mut lx = Lexer {
        src,
        bytes: src.as_bytes(),
        pos: 0,
        out: Lexed { tokens: Vec::new(), comments: Vec::new(), diagnostics: Vec::new() },
        lines: LineIndex::new(src),
    };
    lx.run();
    lx.out
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

impl<'s> Lexer<'s> {
    fn peek_char(&self, at: usize) -> Option<char> {
        self.src.get(at..).and_then(|s| s.chars().next())
    }

    fn byte(&self, at: usize) -> u8 {
        self.bytes.get(at).copied().unwrap_or(0)
    }

    fn diag(&mut self, at: usize, msg: &str) {
        let line = self.lines.line(at);
        let col = self.lines.column(at);
        self.out.diagnostics.push(format!("{line}:{col}: {msg}"));
    }

    fn run(&mut self) {
        let mut nl_before = false;
        let mut ws_before = false;
        if self.src.starts_with("#!") {
            let end = self.line_end(0);
            self.out.comments.push((0, end));
            self.pos = end;
        }
        while self.pos < self.bytes.len() {
            let c = self.peek_char(self.pos).unwrap();
            match c {
                '\n' => {
                    nl_before = true;
                    ws_before = true;
                    self.pos += 1;
                }
                ' ' | '\t' | '\r' | '\u{c}' | '\u{feff}' => {
                    ws_before = true;
                    self.pos += c.len_utf8();
                }
                '/' if self.byte(self.pos + 1) == b'/' => {
                    let end = self.line_end(self.pos);
                    self.out.comments.push((self.pos, end));
                    self.pos = end;
                    ws_before = true;
                }
                '/' if self.byte(self.pos + 1) == b'*' => {
                    let start = self.pos;
                    let end = self.block_comment_end(start);
                    if self.src[start..end].contains('\n') {
                        nl_before = true;
                    }
                    self.out.comments.push((start, end));
                    self.pos = end;
                    ws_before = true;
                }
                _ => {
                    let start = self.pos;
                    let kind = self.token(c);
                    self.out.tokens.push(Token { kind, start, end: self.pos, nl_before, ws_before });
                    nl_before = false;
                    ws_before = false;
                }
            }
        }
        let len = self.bytes.len();
        self.out.tokens.push(Token { kind: Tok::Eof, start: len, end: len, nl_before: true, ws_before: true });
    }

    fn line_end(&self, from: usize) -> usize {
        self.src[from..].find('\n').map_or(self.bytes.len(), |i| from + i)
    }

    /// Kotlin block comments nest.
    fn block_comment_end(&mut self, start: usize) -> usize {
        let mut depth = 0usize;
        let mut i = start;
        while i < self.bytes.len() {
            if self.byte(i) == b'/' && self.byte(i + 1) == b'*' {
                depth += 1;
                i += 2;
            } else if self.byte(i) == b'*' && self.byte(i + 1) == b'/' {
                depth -= 1;
                i += 2;
                if depth == 0 {
                    return i;
                }
            } else {
                i += 1;
            }
        }
        self.diag(start, "unterminated block comment");
        self.bytes.len()
    }

    /// Lexes one token starting at `c`, advancing `pos` past it.
    fn token(&mut self, c: char) -> Tok {
        let start = self.pos;
        if c == '`' {
            let end = self.src[start + 1..].find(['`', '\n']).map_or(self.bytes.len(), |i| start + 1 + i);
            if self.byte(end) == b'`' {
                self.pos = end + 1;
            } else {
                self.diag(start, "unterminated backtick identifier");
                self.pos = end;
            }
            return self.after_ident(start);
        }
        if is_ident_start(c) {
            self.pos = self.ident_end(start);
            return self.after_ident(start);
        }
        if c.is_ascii_digit() || (c == '.' && self.byte(start + 1).is_ascii_digit() && self.dot_starts_number()) {
            return self.number();
        }
        if c == '"' {
            self.pos = self.string_end(start);
            return Tok::Str;
        }
        if c == '\'' {
            if let Some(end) = self.char_literal_end(start) {
                self.pos = end;
                return Tok::Str;
            }
            self.diag(start, "malformed character literal");
            self.pos = start + 1;
            return Tok::Op;
        }
        if c == '@' && self.peek_char(start + 1).is_some_and(|n| is_ident_start(n) || n == '`') {
            let name_start = start + 1;
            self.pos = if self.byte(name_start) == b'`' {
                self.src[name_start + 1..]
                    .find(['`', '\n'])
                    .map_or(self.bytes.len(), |i| name_start + 2 + i)
                    .min(self.bytes.len())
            } else {
                self.ident_end(name_start)
            };
            return Tok::AtIdent;
        }
        let rest = &self.src[start..];
        for op in OPS3.iter().chain(OPS2.iter()) {
            if rest.starts_with(op) {
                self.pos = start + op.len();
                return Tok::Op;
            }
        }
        if OPS1.contains(c) {
            self.pos = start + 1;
            return Tok::Op;
        }
        self.diag(start, &format!("unexpected character {c:?}"));
        self.pos = start + c.len_utf8();
        Tok::Op
    }

    fn ident_end(&self, start: usize) -> usize {
        let mut end = start;
        for (i, ch) in self.src[start..].char_indices() {
            if i == 0 && is_ident_start(ch) || i > 0 && is_ident_continue(ch) {
                end = start + i + ch.len_utf8();
            } else {
                break;
            }
        }
        end
    }

    /// `name@` directly followed by more code is a label definition, except
    /// for keywords that take a label reference (`return@forEach`).
    fn after_ident(&mut self, start: usize) -> Tok {
        if self.byte(self.pos) == b'@' && !LABEL_KEYWORDS.contains(&&self.src[start..self.pos]) {
            self.pos += 1;
            return Tok::LabelDef;
        }
        Tok::Ident
    }

    fn dot_starts_number(&self) -> bool {
        match self.out.tokens.last() {
            None => true,
            Some(t) => match t.kind {
                Tok::Ident | Tok::Int | Tok::Float | Tok::Str => false,
                Tok::Op => !matches!(&self.src[t.start..t.end], ")" | "]" | "}" | "!!" | "++" | "--"),
                _ => true,
            },
        }
    }

    fn number(&mut self) -> Tok {
        let b = self.bytes;
        let mut i = self.pos;
        let mut float = false;
        if b[i] == b'0' && matches!(self.byte(i + 1), b'x' | b'X') {
            i += 2;
            while self.byte(i).is_ascii_hexdigit() || self.byte(i) == b'_' {
                i += 1;
            }
        } else if b[i] == b'0' && matches!(self.byte(i + 1), b'b' | b'B') {
            i += 2;
            while matches!(self.byte(i), b'0' | b'1' | b'_') {
                i += 1;
            }
        } else {
            while self.byte(i).is_ascii_digit() || self.byte(i) == b'_' {
                i += 1;
            }
            // `1..2` is a range, not a float.
            if self.byte(i) == b'.' && self.byte(i + 1).is_ascii_digit() {
                float = true;
                i += 1;
                while self.byte(i).is_ascii_digit() || self.byte(i) == b'_' {
                    i += 1;
                }
            }
            if matches!(self.byte(i), b'e' | b'E') {
                let mut j = i + 1;
                if matches!(self.byte(j), b'+' | b'-') {
                    j += 1;
                }
                if self.byte(j).is_ascii_digit() {
                    float = true;
                    i = j;
                    while self.byte(i).is_ascii_digit() || self.byte(i) == b'_' {
                        i += 1;
                    }
                }
            }
        }
        match self.byte(i) {
            b'f' | b'F' => {
                float = true;
                i += 1;
            }
            b'L' => i += 1,
            b'u' | b'U' => {
                i += 1;
                if self.byte(i) == b'L' {
                    i += 1;
                }
            }
            _ => {}
        }
        self.pos = i;
        if float {
            Tok::Float
        } else {
            Tok::Int
        }
    }

    fn char_literal_end(&self, start: usize) -> Option<usize> {
        let mut i = start + 1;
        match self.peek_char(i)? {
            '\\' => {
                i += 1;
                if self.byte(i) == b'u' {
                    i += 5;
                } else {
                    i += self.peek_char(i)?.len_utf8();
                }
            }
            '\n' | '\'' => return None,
            ch => i += ch.len_utf8(),
        }
        (self.byte(i) == b'\'').then_some(i + 1)
    }

    /// End offset of the string literal starting at `start`, skipping over
    /// `${...}` templates (which may contain nested strings and braces).
    fn string_end(&mut self, start: usize) -> usize {
        let raw = self.src[start..].starts_with("\"\"\"");
        let mut i = if raw { start + 3 } else { start + 1 };
        loop {
            if i >= self.bytes.len() {
                self.diag(start, "unterminated string literal");
                return self.bytes.len();
            }
            match self.byte(i) {
                b'"' if raw => {
                    if self.src[i..].starts_with("\"\"\"") {
                        let mut end = i + 3;
                        while self.byte(end) == b'"' {
                            end += 1;
                        }
                        return end;
                    }
                    i += 1;
                }
                b'"' => return i + 1,
                b'\\' if !raw => {
                    i += 1;
                    i += self.peek_char(i).map_or(0, char::len_utf8);
                }
                b'\n' if !raw => {
                    self.diag(start, "unterminated string literal");
                    return i;
                }
                b'$' if self.byte(i + 1) == b'{' => i = self.template_end(i + 2),
                _ => i += self.peek_char(i).map_or(1, char::len_utf8),
            }
        }
    }

    fn template_end(&mut self, from: usize) -> usize {
        let mut depth = 1usize;
        let mut i = from;
        while i < self.bytes.len() {
            match self.byte(i) {
                b'{' => {
                    depth += 1;
                    i += 1;
                }
                b'}' => {
                    depth -= 1;
                    i += 1;
                    if depth == 0 {
                        return i;
                    }
                }
                b'"' => i = self.string_end(i),
                b'\'' => i = self.char_literal_end(i).unwrap_or(i + 1),
                b'/' if self.byte(i + 1) == b'*' => i = self.block_comment_end(i),
                _ => i += self.peek_char(i).map_or(1, char::len_utf8),
            }
        }
        i
    }
}
