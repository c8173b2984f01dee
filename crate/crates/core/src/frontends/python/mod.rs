mod lexer;
mod parser;

use crate::cst::{ParsedFile, SourceLanguage};
use crate::frontends::raw::build_file;

/// Parses Python 3 source. Never fails: problems are reported through
/// [`ParsedFile::diagnostics`] and the affected regions become `OTHER`.
pub fn parse_python(source: &str, path: &str) -> ParsedFile {
    let lexed = lexer::lex(source);
    let mut p = parser::Parser::new(source, lexed.tokens);
    let root = p.parse_file();
    let mut diagnostics = lexed.diagnostics;
    diagnostics.append(&mut p.diags);
    build_file(path, SourceLanguage::Python, source.to_string(), root, &lexed.comments, diagnostics)
}
