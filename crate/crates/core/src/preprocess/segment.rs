//! Word segmentation.
//!
//! [`DictionarySegmenter`] is the default: runs of ASCII letters, digits and
//! `_` stay whole (so `role_1`, `LOL` and `4242` are single tokens),
//! whitespace runs are kept as tokens, and everything else is matched
//! longest-first against a word list with a single-character fallback.
//! Concatenating its output always reproduces the input.

use std::collections::HashSet;
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use crate::error::Result;

/// A deterministic text-to-tokens function.
pub trait Segmenter: Send + Sync {
    fn segment(&self, text: &str) -> Vec<String>;
}

/// Splits on Unicode whitespace.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceSegmenter;

impl Segmenter for WhitespaceSegmenter {
    fn segment(&self, text: &str) -> Vec<String> {
        text.split_whitespace().map(str::to_string).collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct DictionarySegmenter {
    words: HashSet<String>,
    max_chars: usize,
}

impl DictionarySegmenter {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seg = DictionarySegmenter::default();
        for w in words {
            let w: String = w.as_ref().trim().nfc().collect();
            if w.is_empty() {
                continue;
            }
            seg.max_chars = seg.max_chars.max(w.chars().count());
            seg.words.insert(w);
        }
        seg
    }

    /// One word per line; blank lines ignored.
    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::io::read_to_string(path)?;
        Ok(DictionarySegmenter::new(text.lines()))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    fn longest_word(&self, rest: &str) -> usize {
        // byte offsets after 1, 2, ... chars
        let ends: Vec<usize> = rest
            .char_indices()
            .skip(1)
            .map(|(i, _)| i)
            .chain(std::iter::once(rest.len()))
            .take(self.max_chars.max(1))
            .collect();
        ends.iter()
            .rev()
            .find(|&&end| self.words.contains(&rest[..end]))
            .copied()
            .unwrap_or(ends[0])
    }
}

fn is_word_ascii(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn run_len(rest: &str, pred: impl Fn(char) -> bool) -> usize {
    rest.char_indices()
        .find(|(_, c)| !pred(*c))
        .map_or(rest.len(), |(i, _)| i)
}

impl Segmenter for DictionarySegmenter {
    fn segment(&self, text: &str) -> Vec<String> {
        let mut tokens = Vec::new();
        let mut pos = 0;
        while pos < text.len() {
            let rest = &text[pos..];
            let first = rest.chars().next().expect("non-empty");
            let len = if is_word_ascii(first) {
                run_len(rest, is_word_ascii)
            } else if first.is_whitespace() {
                run_len(rest, char::is_whitespace)
            } else {
                self.longest_word(rest)
            };
            tokens.push(rest[..len].to_string());
            pos += len;
        }
        tokens
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn whitespace_keeps_tags() {
        assert_eq!(WhitespaceSegmenter.segment("role_1 很 好"), ["role_1", "很", "好"]);
        assert!(WhitespaceSegmenter.segment("").is_empty());
    }

    #[test]
    fn dictionary_longest_match_reconstructs() {
        let seg = DictionarySegmenter::new(["这部", "这部剧", "好看", "很好"]);
        let tokens = seg.segment("这部剧很好看");
        assert_eq!(tokens.concat(), "这部剧很好看");
        assert_eq!(tokens, ["这部剧", "很好", "看"]);
    }

    #[test]
    fn ascii_runs_and_tags_stay_whole() {
        let seg = DictionarySegmenter::new(["出场"]);
        assert_eq!(seg.segment("role_1出场了LOL 4242"), ["role_1", "出场", "了", "LOL", " ", "4242"]);
    }

    #[test]
    fn empty_dictionary_falls_back_to_characters() {
        let seg = DictionarySegmenter::default();
        assert_eq!(seg.segment("好看"), ["好", "看"]);
        assert!(seg.segment("").is_empty());
    }

    proptest! {
        #[test]
        fn concatenation_reproduces_input(
            words in prop::collection::vec("[这部剧很好看花千骨]{1,3}", 0..8),
            text in "[这部剧很好看花千骨a-c1_ ，]{0,30}",
        ) {
            let seg = DictionarySegmenter::new(&words);
            let tokens = seg.segment(&text);
            prop_assert!(tokens.iter().all(|t| !t.is_empty()));
            prop_assert_eq!(tokens.concat(), text.clone());
            prop_assert_eq!(seg.segment(&text), tokens);
        }
    }
}
