//! Built-in analyzers.

mod keyword_count;
mod kotlin_ranges;
mod unreachable_while;

use std::sync::Arc;

pub use keyword_count::KeywordCount;
pub use kotlin_ranges::{range_kind, KotlinRanges, RangeKind};
pub use unreachable_while::UnreachableWhile;

use crate::analyzer::Analyzer;

pub fn builtins() -> Vec<Arc<dyn Analyzer>> {
    vec![Arc::new(KotlinRanges), Arc::new(UnreachableWhile), Arc::new(KeywordCount::default())]
}
