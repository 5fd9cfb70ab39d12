//! Review text to tokens: surrogate substitution, segmentation, stop words.
//!
//! Substitution runs on raw text before segmentation, so a multi-character
//! name is never split by the segmenter. Inside [`Preprocessor`], tags emitted
//! by substitution become tokens directly and only the text between them is
//! segmented.

mod segment;
mod stopwords;
mod surrogate;
mod vocab;

use std::collections::HashMap;
use std::sync::Arc;

pub use segment::{DictionarySegmenter, Segmenter, WhitespaceSegmenter};
pub use stopwords::{StopList, BASIC_CHINESE, FORUM_WORDS};
pub use surrogate::{KnowledgeBase, PersonEntry, PersonKind, Piece, SurrogateMap};
pub use vocab::{BinaryVector, Vocabulary};

use crate::error::{Error, Result};

pub fn build_surrogate_map(kb: &KnowledgeBase) -> Result<SurrogateMap> {
    SurrogateMap::build(kb)
}

pub fn substitute(text: &str, map: &SurrogateMap) -> String {
    map.substitute(text)
}

pub fn tokenize(text: &str, seg: &dyn Segmenter) -> Vec<String> {
    seg.segment(text)
}

pub fn remove_stopwords(tokens: Vec<String>, stoplist: &StopList) -> Vec<String> {
    stoplist.remove(tokens)
}

pub fn vectorize<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> BinaryVector {
    vocab.vectorize(tokens)
}

/// Tokens with no letter or digit (whitespace, punctuation) carry no content.
pub fn is_content_token(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric)
}

/// The full text pipeline, with per-series surrogate maps.
#[derive(Clone)]
pub struct Preprocessor {
    segmenter: Arc<dyn Segmenter>,
    stoplist: StopList,
    maps: HashMap<String, SurrogateMap>,
    surrogates: bool,
}

impl Preprocessor {
    pub fn new(segmenter: Arc<dyn Segmenter>, stoplist: StopList) -> Self {
        Preprocessor {
            segmenter,
            stoplist,
            maps: HashMap::new(),
            surrogates: false,
        }
    }

    /// Enables substitution using one knowledge base per series.
    pub fn with_knowledge_bases<'a, I>(mut self, kbs: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a KnowledgeBase>,
    {
        for kb in kbs {
            self.maps.insert(kb.series.clone(), SurrogateMap::build(kb)?);
        }
        self.surrogates = true;
        Ok(self)
    }

    pub fn surrogates_enabled(&self) -> bool {
        self.surrogates
    }

    pub fn stoplist(&self) -> &StopList {
        &self.stoplist
    }

    /// Fails when substitution is on and some series has no knowledge base.
    pub fn check_series<'a, I: IntoIterator<Item = &'a str>>(&self, series: I) -> Result<()> {
        if !self.surrogates {
            return Ok(());
        }
        for s in series {
            if !self.maps.contains_key(s) {
                return Err(Error::MissingKnowledgeBase(s.to_string()));
            }
        }
        Ok(())
    }

    /// substitute (if enabled) -> segment -> drop non-content -> drop stop words.
    pub fn process(&self, series: &str, text: &str) -> Result<Vec<String>> {
        let mut tokens = Vec::new();
        if self.surrogates {
            let map = self
                .maps
                .get(series)
                .ok_or_else(|| Error::MissingKnowledgeBase(series.to_string()))?;
            for piece in map.segments(text) {
                match piece {
                    Piece::Tag(tag) => tokens.push(tag.to_string()),
                    Piece::Text(t) => tokens.extend(self.segmenter.segment(t)),
                }
            }
        } else {
            tokens = self.segmenter.segment(text);
        }
        tokens.retain(|t| is_content_token(t));
        Ok(self.stoplist.remove(tokens))
    }
}
