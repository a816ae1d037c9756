//! Shared word tokenizer.

use std::sync::LazyLock;

use regex::Regex;

static WORD: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\d{3,4}(?:-\d{1,2}){1,2}|[A-Za-z0-9]+(?:['.][A-Za-z0-9]+)*").expect("valid regex")
});

/// A word with its byte span in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

/// Splits text into words: ISO-like dates stay whole, dotted abbreviations
/// such as `J.F` and `U.S` stay whole, everything else breaks on
/// non-alphanumerics.
pub fn words(text: &str) -> Vec<Word<'_>> {
    WORD.find_iter(text)
        .map(|m| Word {
            text: m.as_str(),
            start: m.start(),
            end: m.end(),
        })
        .collect()
}

pub fn normalized(text: &str) -> Vec<String> {
    words(text).into_iter().map(|w| w.text.to_lowercase()).collect()
}
