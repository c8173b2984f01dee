//! Python tokenizer with INDENT/DEDENT/NEWLINE synthesis.

use crate::frontends::raw::LineIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tok {
    Name,
    Int,
    /// Floats and imaginary literals.
    Float,
    Str,
    Op,
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Token {
    pub kind: Tok,
    pub start: usize,
    pub end: usize,
}

pub(crate) struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<(usize, usize)>,
    pub diagnostics: Vec<String>,
}

const OPS3: &[&str] = &["**=", "//=", ">>=", "<<=", "..."];
const OPS2: &[&str] =
    &["**", "//", "==", "!=", "<=", ">=", "<<", ">>", "->", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", ":="];
const OPS1: &str = "+-*/%@&|^~<>()[]{},:.;=";

/// Tab stops every 8 columns, as the reference tokenizer does.
const TAB: usize = 8;

struct Lexer<'s> {
    src: &'s str,
    bytes: &'s [u8],
    i: usize,
    out: Lexed,
    lines: LineIndex,
    indents: Vec<usize>,
    brackets: usize,
    /// Tokens were emitted on the current logical line.
    line_has_tokens: bool,
}

pub(crate) fn lex(src: &str) -> Lexed {
    let mut lx = Lexer {
        src,
        bytes: src.as_bytes(),
        i: 0,
        out: Lexed { tokens: Vec::new(), comments: Vec::new(), diagnostics: Vec::new() },
        lines: LineIndex::new(src),
        indents: vec![0],
        brackets: 0,
        line_has_tokens: false,
    };
    lx.run();
    lx.out
}

fn is_name_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_name_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

impl<'s> Lexer<'s> {
    fn byte(&self, at: usize) -> u8 {
        self.bytes.get(at).copied().unwrap_or(0)
    }

    fn diag(&mut self, at: usize, msg: &str) {
        let line = self.lines.line(at);
        let col = self.lines.column(at);
        self.out.diagnostics.push(format!("{line}:{col}: {msg}"));
    }

    fn push(&mut self, kind: Tok, start: usize, end: usize) {
        self.out.tokens.push(Token { kind, start, end });
        if !matches!(kind, Tok::Newline | Tok::Indent | Tok::Dedent | Tok::Eof) {
            self.line_has_tokens = true;
        }
    }

    fn end_logical_line(&mut self, at: usize) {
        if self.line_has_tokens {
            self.push(Tok::Newline, at, at);
            self.line_has_tokens = false;
        }
    }

    fn run(&mut self) {
        let mut at_line_start = true;
        while self.i < self.bytes.len() {
            if at_line_start && self.brackets == 0 {
                // Blank lines leave us at the start of the next line.
                at_line_start = self.indentation();
                if at_line_start {
                    continue;
                }
            }
            let b = self.byte(self.i);
            match b {
                b'\n' => {
                    if self.brackets == 0 {
                        self.end_logical_line(self.i);
                    }
                    self.i += 1;
                    // Inside brackets, indentation is meaningless.
                    at_line_start = self.brackets == 0;
                }
                b' ' | b'\t' | b'\r' | b'\x0c' => self.i += 1,
                b'#' => {
                    let start = self.i;
                    while self.i < self.bytes.len() && self.byte(self.i) != b'\n' {
                        self.i += 1;
                    }
                    self.out.comments.push((start, self.i));
                }
                b'\\' if self.byte(self.i + 1) == b'\n' => self.i += 2,
                b'\\' if self.byte(self.i + 1) == b'\r' && self.byte(self.i + 2) == b'\n' => self.i += 3,
                b'0'..=b'9' => self.number(),
                b'.' if self.byte(self.i + 1).is_ascii_digit() => self.number(),
                b'"' | b'\'' => {
                    let start = self.i;
                    self.string(start, start, false);
                }
                _ => {
                    let c = self.src[self.i..].chars().next().unwrap_or('\0');
                    if is_name_start(c) {
                        self.name_or_prefixed_string();
                    } else {
                        self.operator(c);
                    }
                }
            }
        }
        self.end_logical_line(self.bytes.len());
        let end = self.bytes.len();
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(Tok::Dedent, end, end);
        }
        if self.brackets > 0 {
            self.diag(end, "unclosed bracket at end of file");
        }
        self.push(Tok::Eof, end, end);
    }

    /// Measures indentation at a line start and emits INDENT/DEDENT. Returns
    /// true if the line is blank or comment-only (no tokens, no NEWLINE).
    fn indentation(&mut self) -> bool {
        let mut col = 0;
        let mut j = self.i;
        loop {
            match self.byte(j) {
                b' ' => col += 1,
                b'\t' => col = (col / TAB + 1) * TAB,
                b'\x0c' => col = 0,
                _ => break,
            }
            j += 1;
        }
        let blank = match self.byte(j) {
            b'\n' | b'#' | 0 => true,
            b'\r' => self.byte(j + 1) == b'\n',
            _ => false,
        };
        if blank {
            // Comment-only and empty lines do not affect the block structure.
            self.i = j;
            while self.i < self.bytes.len() && self.byte(self.i) != b'\n' {
                if self.byte(self.i) == b'#' {
                    let start = self.i;
                    while self.i < self.bytes.len() && self.byte(self.i) != b'\n' {
                        self.i += 1;
                    }
                    self.out.comments.push((start, self.i));
                    break;
                }
                self.i += 1;
            }
            if self.i < self.bytes.len() {
                self.i += 1;
            }
            return true;
        }
        self.i = j;
        let current = *self.indents.last().expect("indent stack never empty");
        if col > current {
            self.indents.push(col);
            self.push(Tok::Indent, j, j);
        } else if col < current {
            while *self.indents.last().expect("indent stack never empty") > col {
                self.indents.pop();
                self.push(Tok::Dedent, j, j);
            }
            if *self.indents.last().expect("indent stack never empty") != col {
                self.diag(j, "unindent does not match any outer indentation level");
                self.indents.push(col);
            }
        }
        false
    }

    fn number(&mut self) {
        let start = self.i;
        let mut float = false;
        if self.byte(self.i) == b'0' && matches!(self.byte(self.i + 1), b'x' | b'X' | b'o' | b'O' | b'b' | b'B') {
            self.i += 2;
            while self.byte(self.i).is_ascii_alphanumeric() || self.byte(self.i) == b'_' {
                self.i += 1;
            }
        } else {
            self.digits();
            if self.byte(self.i) == b'.' {
                float = true;
                self.i += 1;
                self.digits();
            }
            if matches!(self.byte(self.i), b'e' | b'E') {
                let sign = usize::from(matches!(self.byte(self.i + 1), b'+' | b'-'));
                if self.byte(self.i + 1 + sign).is_ascii_digit() {
                    float = true;
                    self.i += 1 + sign;
                    self.digits();
                }
            }
            if matches!(self.byte(self.i), b'j' | b'J') {
                float = true;
                self.i += 1;
            }
        }
        self.push(if float { Tok::Float } else { Tok::Int }, start, self.i);
    }

    fn digits(&mut self) {
        while self.byte(self.i).is_ascii_digit() || self.byte(self.i) == b'_' {
            self.i += 1;
        }
    }

    fn name_or_prefixed_string(&mut self) {
        let start = self.i;
        let mut end = self.i;
        for (off, c) in self.src[self.i..].char_indices() {
            if !is_name_continue(c) {
                break;
            }
            end = self.i + off + c.len_utf8();
        }
        let word = &self.src[start..end];
        if matches!(self.byte(end), b'"' | b'\'') && word.len() <= 2 {
            let lower = word.to_ascii_lowercase();
            if matches!(lower.as_str(), "r" | "u" | "b" | "f" | "br" | "rb" | "fr" | "rf") {
                self.string(start, end, lower.contains('f'));
                return;
            }
        }
        self.i = end;
        self.push(Tok::Name, start, end);
    }

    /// Lexes a string literal whose quote begins at `quote_at`; `start`
    /// includes any prefix.
    fn string(&mut self, start: usize, quote_at: usize, fmt: bool) {
        let end = self.string_end(quote_at, fmt);
        self.i = end;
        self.push(Tok::Str, start, end);
    }

    fn string_end(&mut self, quote_at: usize, fmt: bool) -> usize {
        let q = self.byte(quote_at);
        let triple = self.byte(quote_at + 1) == q && self.byte(quote_at + 2) == q;
        let mut j = quote_at + if triple { 3 } else { 1 };
        let mut brace_depth = 0usize;
        loop {
            let b = self.byte(j);
            if j >= self.bytes.len() {
                self.diag(quote_at, "unterminated string literal");
                return self.bytes.len();
            }
            if brace_depth > 0 {
                match b {
                    b'{' | b'[' | b'(' => brace_depth += 1,
                    b'}' | b']' | b')' => brace_depth -= 1,
                    b'"' | b'\'' if b != q || triple => {
                        j = self.string_end(j, false);
                        continue;
                    }
                    _ => {}
                }
                if !(b == q && !triple) {
                    j += 1;
                    continue;
                }
            }
            match b {
                // Raw strings still cannot end on an escaped quote.
                b'\\' => j += 2,
                b'\n' if !triple => {
                    self.diag(quote_at, "unterminated string literal");
                    return j;
                }
                b'{' if fmt => {
                    if self.byte(j + 1) == b'{' {
                        j += 2;
                    } else {
                        brace_depth = 1;
                        j += 1;
                    }
                }
                _ if b == q => {
                    if !triple {
                        return j + 1;
                    }
                    if self.byte(j + 1) == q && self.byte(j + 2) == q {
                        return j + 3;
                    }
                    j += 1;
                }
                _ => j += 1,
            }
        }
    }

    fn operator(&mut self, c: char) {
        let start = self.i;
        let rest = &self.src[start..];
        let len = OPS3
            .iter()
            .chain(OPS2)
            .find(|op| rest.starts_with(**op))
            .map(|op| op.len())
            .or_else(|| OPS1.contains(c).then_some(1));
        match len {
            Some(n) => {
                match &rest[..n] {
                    "(" | "[" | "{" => self.brackets += 1,
                    ")" | "]" | "}" => {
                        if self.brackets == 0 {
                            self.diag(start, "unmatched closing bracket");
                        }
                        self.brackets = self.brackets.saturating_sub(1);
                    }
                    _ => {}
                }
                self.i += n;
                self.push(Tok::Op, start, self.i);
            }
            None => {
                let n = c.len_utf8();
                self.diag(start, &format!("unexpected character {c:?}"));
                self.i += n;
                self.push(Tok::Op, start, self.i);
            }
        }
    }
}
