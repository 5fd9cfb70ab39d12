//! Tokenized corpora and their binary bag-of-words form.
//!
//! A tokenized corpus file is JSON Lines:
//!
//! ```text
//! {"id": "r1", "series": "s1", "label": "plot", "tokens": ["role_1", "出场"]}
//! ```
//!
//! `label` is omitted for reviews without a resolved category.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Category, Corpus};
use crate::error::{Error, Result};
use crate::preprocess::{BinaryVector, Preprocessor, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedReview {
    pub id: String,
    pub series: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Category>,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenizedCorpus {
    pub reviews: Vec<TokenizedReview>,
}

impl TokenizedCorpus {
    /// Runs every review of `corpus` through `pre`, keeping corpus order.
    pub fn from_corpus(corpus: &Corpus, pre: &Preprocessor) -> Result<Self> {
        pre.check_series(corpus.series_names())?;
        let reviews = corpus
            .reviews()
            .iter()
            .enumerate()
            .map(|(i, r)| {
                Ok(TokenizedReview {
                    id: r.id.clone(),
                    series: r.series.clone(),
                    label: corpus.label(i),
                    tokens: pre.process(&r.series, &r.text)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(TokenizedCorpus { reviews })
    }

    pub fn parse_jsonl(text: &str) -> Result<Self> {
        let reviews = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                serde_json::from_str(l).map_err(|e| Error::MalformedLine {
                    line: i + 1,
                    field: "<json>".into(),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(TokenizedCorpus { reviews })
    }

    pub fn load(path: &Path) -> Result<Self> {
        TokenizedCorpus::parse_jsonl(&crate::io::read_to_string(path)?)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.reviews {
            out.push_str(&serde_json::to_string(r).expect("tokenized review serializes"));
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    /// Reviews whose series is in `series`, in order.
    pub fn filter_series<S: AsRef<str>>(&self, series: &[S]) -> Self {
        TokenizedCorpus {
            reviews: self
                .reviews
                .iter()
                .filter(|r| series.iter().any(|s| s.as_ref() == r.series))
                .cloned()
                .collect(),
        }
    }

    /// Labeled reviews only.
    pub fn labeled(&self) -> LabeledDocs {
        let (tokens, labels) = self
            .reviews
            .iter()
            .filter_map(|r| r.label.map(|l| (r.tokens.clone(), l)))
            .unzip();
        LabeledDocs { tokens, labels }
    }
}

/// Token lists with one category each.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledDocs {
    pub tokens: Vec<Vec<String>>,
    pub labels: Vec<Category>,
}

impl LabeledDocs {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Vectorizes over a vocabulary built from these documents.
    pub fn to_dataset(&self) -> Dataset {
        let vocab = Vocabulary::build(self.tokens.iter().map(Vec::as_slice));
        self.to_dataset_with(vocab)
    }

    /// Vectorizes over a fixed vocabulary; unknown tokens are dropped.
    pub fn to_dataset_with(&self, vocab: Vocabulary) -> Dataset {
        let rows = self.tokens.iter().map(|t| vocab.vectorize(t)).collect();
        Dataset {
            vocab,
            rows,
            labels: self.labels.clone(),
        }
    }
}

/// A vocabulary plus one binary row and label per document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub vocab: Vocabulary,
    pub rows: Vec<BinaryVector>,
    pub labels: Vec<Category>,
}

impl Dataset {
    pub fn new(vocab: Vocabulary, rows: Vec<BinaryVector>, labels: Vec<Category>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: labels.len(),
            });
        }
        if let Some(r) = rows.iter().find(|r| r.min_dim() > vocab.len()) {
            return Err(Error::DimensionMismatch {
                expected: vocab.len(),
                got: r.min_dim() - 1,
            });
        }
        Ok(Dataset { vocab, rows, labels })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// One-vs-rest relevance labels for `class`.
    pub fn relevance(&self, class: Category) -> Vec<bool> {
        self.labels.iter().map(|l| *l == class).collect()
    }
}
