//! Labeled review corpora.
//!
//! A corpus file is UTF-8 JSON Lines, one review per line:
//!
//! ```text
//! {"id": "r1", "series": "s1", "episode": 3, "text": "...", "annotations": [2, 2]}
//! ```
//!
//! `episode` is optional, unknown fields are ignored and blank lines skipped.
//! Text is NFC-normalized on load.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// The eight review categories, in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Category {
    Plot,
    ActorActress,
    Role,
    Dialogue,
    Analysis,
    Platform,
    ThumbUpOrDown,
    NoiseOthers,
}

impl Category {
    pub const COUNT: usize = 8;

    pub const ALL: [Category; Category::COUNT] = [
        Category::Plot,
        Category::ActorActress,
        Category::Role,
        Category::Dialogue,
        Category::Analysis,
        Category::Platform,
        Category::ThumbUpOrDown,
        Category::NoiseOthers,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Category> {
        Category::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Plot => "plot",
            Category::ActorActress => "actor/actress",
            Category::Role => "role",
            Category::Dialogue => "dialogue",
            Category::Analysis => "analysis",
            Category::Platform => "platform",
            Category::ThumbUpOrDown => "thumb-up-or-down",
            Category::NoiseOthers => "noise/others",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .or_else(|| s.parse::<usize>().ok().and_then(Category::from_index))
            .ok_or_else(|| Error::Config(format!("unknown category `{s}`")))
    }
}

impl From<Category> for String {
    fn from(c: Category) -> String {
        c.name().to_string()
    }
}

impl TryFrom<String> for Category {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub id: String,
    pub series: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episode: Option<u32>,
    pub text: String,
    pub annotations: Vec<u8>,
}

impl Review {
    /// The common annotation when at least two annotators agree unanimously.
    pub fn unanimous_label(&self) -> Option<Category> {
        let (first, rest) = self.annotations.split_first()?;
        if rest.is_empty() || rest.iter().any(|a| a != first) {
            return None;
        }
        Category::from_index(*first as usize)
    }
}

/// An immutable, ordered collection of reviews.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    reviews: Vec<Review>,
    labels: Vec<Option<Category>>,
    series_index: BTreeMap<String, Vec<usize>>,
}

/// Counts produced by [`Corpus::agreement_filter`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FilterReport {
    pub input: usize,
    pub kept: usize,
    pub dropped_disagreement: usize,
    pub dropped_too_few_annotations: usize,
}

impl FilterReport {
    pub fn dropped(&self) -> usize {
        self.dropped_disagreement + self.dropped_too_few_annotations
    }
}

impl Corpus {
    /// Builds a corpus after checking every review invariant.
    pub fn new(reviews: Vec<Review>) -> Result<Corpus> {
        let mut seen = HashSet::new();
        let mut normalized = Vec::with_capacity(reviews.len());
        for (i, mut r) in reviews.into_iter().enumerate() {
            let line = i + 1;
            r.id = r.id.nfc().collect();
            r.series = r.series.nfc().collect();
            r.text = r.text.nfc().collect();
            validate(&r, line)?;
            if !seen.insert(r.id.clone()) {
                return Err(Error::DuplicateId { id: r.id, line });
            }
            normalized.push(r);
        }
        Ok(Corpus::from_valid(normalized))
    }

    fn from_valid(reviews: Vec<Review>) -> Corpus {
        let labels = reviews.iter().map(Review::unanimous_label).collect();
        let mut series_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, r) in reviews.iter().enumerate() {
            series_index.entry(r.series.clone()).or_default().push(i);
        }
        Corpus {
            reviews,
            labels,
            series_index,
        }
    }

    pub fn load(path: &Path) -> Result<Corpus> {
        let text = crate::io::read_to_string(path)?;
        Corpus::parse_jsonl(&text)
    }

    /// Parses JSON Lines text; errors cite the 1-based line number.
    pub fn parse_jsonl(text: &str) -> Result<Corpus> {
        let mut reviews = Vec::new();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let review = parse_line(raw, line)?;
            validate(&review, line)?;
            if !seen.insert(review.id.clone()) {
                return Err(Error::DuplicateId {
                    id: review.id,
                    line,
                });
            }
            reviews.push(review);
        }
        Ok(Corpus::from_valid(reviews))
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.reviews {
            out.push_str(&serde_json::to_string(r).expect("review serializes"));
            out.push('\n');
        }
        out
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    /// Resolved label of review `i`, present only for unanimous reviews.
    pub fn label(&self, i: usize) -> Option<Category> {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Option<Category>] {
        &self.labels
    }

    pub fn series_index(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.series_index
    }

    pub fn series_names(&self) -> Vec<&str> {
        self.series_index.keys().map(String::as_str).collect()
    }

    /// Keeps only reviews with at least two annotations that all agree.
    pub fn agreement_filter(&self) -> (Corpus, FilterReport) {
        let mut report = FilterReport {
            input: self.len(),
            ..Default::default()
        };
        let mut kept = Vec::new();
        for r in &self.reviews {
            if r.annotations.len() < 2 {
                report.dropped_too_few_annotations += 1;
            } else if r.unanimous_label().is_none() {
                report.dropped_disagreement += 1;
            } else {
                kept.push(r.clone());
            }
        }
        report.kept = kept.len();
        (Corpus::from_valid(kept), report)
    }

    /// The first `limit` reviews of every series, in file order.
    pub fn take_per_series(&self, limit: usize) -> Corpus {
        let mut taken: BTreeMap<&str, usize> = BTreeMap::new();
        let kept = self
            .reviews
            .iter()
            .filter(|r| {
                let n = taken.entry(r.series.as_str()).or_default();
                *n += 1;
                *n <= limit
            })
            .cloned()
            .collect();
        Corpus::from_valid(kept)
    }

    /// Partitions reviews by series. Reviews of series in neither set are dropped.
    pub fn split_by_series<S: AsRef<str>>(&self, train: &[S], test: &[S]) -> Result<(Corpus, Corpus)> {
        let train: BTreeSet<&str> = train.iter().map(AsRef::as_ref).collect();
        let test: BTreeSet<&str> = test.iter().map(AsRef::as_ref).collect();
        if let Some(s) = train.intersection(&test).next() {
            return Err(Error::OverlappingSplit(s.to_string()));
        }
        if let Some(s) = train
            .iter()
            .chain(test.iter())
            .find(|s| !self.series_index.contains_key(**s))
        {
            return Err(Error::UnknownSeries(s.to_string()));
        }
        let pick = |set: &BTreeSet<&str>| {
            Corpus::from_valid(
                self.reviews
                    .iter()
                    .filter(|r| set.contains(r.series.as_str()))
                    .cloned()
                    .collect(),
            )
        };
        Ok((pick(&train), pick(&test)))
    }
}

fn validate(r: &Review, line: usize) -> Result<()> {
    let bad = |field: &str, reason: &str| Error::MalformedLine {
        line,
        field: field.to_string(),
        reason: reason.to_string(),
    };
    if r.id.is_empty() {
        return Err(bad("id", "must be non-empty"));
    }
    if r.text.trim().is_empty() {
        return Err(bad("text", "must be non-empty"));
    }
    if let Some(a) = r.annotations.iter().find(|a| **a as usize >= Category::COUNT) {
        return Err(bad("annotations", &format!("label {a} outside 0..=7")));
    }
    Ok(())
}

fn parse_line(raw: &str, line: usize) -> Result<Review> {
    let bad = |field: &str, reason: String| Error::MalformedLine {
        line,
        field: field.to_string(),
        reason,
    };
    let value: Value = serde_json::from_str(raw).map_err(|e| bad("<json>", e.to_string()))?;
    let obj: &Map<String, Value> = value
        .as_object()
        .ok_or_else(|| bad("<json>", "expected an object".into()))?;

    let string_field = |name: &str| -> Result<String> {
        match obj.get(name) {
            None => Err(bad(name, "missing".into())),
            Some(Value::String(s)) => Ok(s.nfc().collect()),
            Some(_) => Err(bad(name, "expected a string".into())),
        }
    };
    let id = string_field("id")?;
    let series = string_field("series")?;
    let text = string_field("text")?;

    let episode = match obj.get("episode") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .and_then(|e| u32::try_from(e).ok())
                .ok_or_else(|| bad("episode", "expected a non-negative integer".into()))?,
        ),
    };

    let annotations = match obj.get("annotations") {
        None => return Err(bad("annotations", "missing".into())),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_u64()
                    .filter(|a| *a < Category::COUNT as u64)
                    .map(|a| a as u8)
                    .ok_or_else(|| bad("annotations", format!("{v} is not a label in 0..=7")))
            })
            .collect::<Result<Vec<u8>>>()?,
        Some(_) => return Err(bad("annotations", "expected an array".into())),
    };

    Ok(Review {
        id,
        series,
        episode,
        text,
        annotations,
    })
}
