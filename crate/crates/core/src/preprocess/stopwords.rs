//! Stop-word lists.
//!
//! File format: one token per line, `#` comments and blank lines ignored.
//! Matching folds case, which only affects cased scripts: Latin forum slang
//! (`LOL`, `lol`) matches either way while CJK entries match exactly.

use std::collections::HashSet;
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use crate::error::Result;

/// Forum slang commonly mixed into Chinese reviews.
pub const FORUM_WORDS: [&str; 9] = ["BBS", "BT", "NB", "BS", "CU", "LOL", "4242", "SF", "YY"];

/// A small set of very common Chinese function words.
pub const BASIC_CHINESE: [&str; 16] = [
    "的", "了", "是", "在", "我", "也", "和", "就", "都", "这", "那", "啊", "吧", "呢", "吗", "着",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopList {
    folded: HashSet<String>,
}

fn fold(token: &str) -> String {
    token.nfc().collect::<String>().to_lowercase()
}

impl StopList {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopList {
            folded: words
                .into_iter()
                .map(|w| fold(w.as_ref().trim()))
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Self {
        StopList::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(StopList::parse(&crate::io::read_to_string(path)?))
    }

    pub fn forum_words() -> Self {
        StopList::new(FORUM_WORDS)
    }

    /// Forum slang plus basic Chinese function words.
    pub fn builtin() -> Self {
        StopList::new(FORUM_WORDS.iter().chain(BASIC_CHINESE.iter()))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.folded.contains(&fold(token))
    }

    pub fn len(&self) -> usize {
        self.folded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folded.is_empty()
    }

    /// Order-preserving removal of stop words.
    pub fn remove(&self, tokens: Vec<String>) -> Vec<String> {
        tokens.into_iter().filter(|t| !self.contains(t)).collect()
    }
}
