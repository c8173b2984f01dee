//! Source frontends: text in, [`ParsedFile`] out.

mod kotlin;
mod python;
pub(crate) mod raw;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::cst::{ParsedFile, SourceLanguage};

pub use kotlin::parse_kotlin;
pub use python::parse_python;

pub type ParseFn = fn(&str, &str) -> ParsedFile;

/// Language for a file path by extension. Unknown extensions yield `None`.
pub fn detect_language(path: impl AsRef<Path>) -> Option<SourceLanguage> {
    match path.as_ref().extension()?.to_str()? {
        "kt" | "kts" => Some(SourceLanguage::Kotlin),
        "py" => Some(SourceLanguage::Python),
        _ => None,
    }
}

/// Decodes file bytes as UTF-8, dropping a leading byte-order mark.
pub fn decode_source(bytes: Vec<u8>) -> Result<String, std::string::FromUtf8Error> {
    let mut text = String::from_utf8(bytes)?;
    if text.starts_with('\u{feff}') {
        // Keep byte offsets meaningful for the tool's own output: the mark
        // is not part of any construct.
        text.replace_range(..3, "");
    }
    Ok(text)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicateExtension(pub String);

impl fmt::Display for DuplicateExtension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "extension `.{}` already has a frontend", self.0)
    }
}

impl std::error::Error for DuplicateExtension {}

/// Extension → frontend table. Each extension has at most one frontend.
#[derive(Clone)]
pub struct FrontendRegistry {
    entries: BTreeMap<String, (SourceLanguage, ParseFn)>,
}

impl FrontendRegistry {
    pub fn empty() -> Self {
        FrontendRegistry { entries: BTreeMap::new() }
    }

    /// Extension without the leading dot, e.g. `"kt"`.
    pub fn register(
        &mut self,
        extension: &str,
        language: SourceLanguage,
        parse: ParseFn,
    ) -> Result<(), DuplicateExtension> {
        let ext = extension.trim_start_matches('.').to_ascii_lowercase();
        if self.entries.contains_key(&ext) {
            return Err(DuplicateExtension(ext));
        }
        self.entries.insert(ext, (language, parse));
        Ok(())
    }

    pub fn lookup(&self, path: impl AsRef<Path>) -> Option<(SourceLanguage, ParseFn)> {
        let ext = path.as_ref().extension()?.to_str()?;
        self.entries.get(ext).copied()
    }

    pub fn extensions(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

impl Default for FrontendRegistry {
    fn default() -> Self {
        let mut r = FrontendRegistry::empty();
        for (ext, lang, f) in [
            ("kt", SourceLanguage::Kotlin, parse_kotlin as ParseFn),
            ("kts", SourceLanguage::Kotlin, parse_kotlin),
            ("py", SourceLanguage::Python, parse_python),
        ] {
            r.register(ext, lang, f).expect("built-in extensions are distinct");
        }
        r
    }
}

impl fmt::Debug for FrontendRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter().map(|(k, (l, _))| (k, l))).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_by_extension() {
        assert_eq!(detect_language("src/Main.kt"), Some(SourceLanguage::Kotlin));
        assert_eq!(detect_language("build.gradle.kts"), Some(SourceLanguage::Kotlin));
        assert_eq!(detect_language("tool/run.py"), Some(SourceLanguage::Python));
        assert_eq!(detect_language("README.md"), None);
        assert_eq!(detect_language("Makefile"), None);
    }

    #[test]
    fn registry_rejects_duplicates() {
        let mut r = FrontendRegistry::default();
        assert!(r.register(".py", SourceLanguage::Python, parse_python).is_err());
        assert!(r.lookup("x.rs").is_none());
        assert_eq!(r.lookup("a/b.kt").map(|e| e.0), Some(SourceLanguage::Kotlin));
    }

    #[test]
    fn bom_is_dropped() {
        let text = decode_source(b"\xef\xbb\xbfx = 1\n".to_vec()).unwrap();
        assert_eq!(text, "x = 1\n");
        assert!(decode_source(vec![0xff, 0xfe, 0x00]).is_err());
    }
}
