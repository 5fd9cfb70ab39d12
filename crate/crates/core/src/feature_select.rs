//! Per-class feature ranking by chi-square or document relevance correlation.
//!
//! For a term and a class, documents fall into a 2x2 table:
//!
//! |              | relevant | irrelevant |
//! |--------------|----------|------------|
//! | term present | A        | B          |
//! | term absent  | C        | D          |
//!
//! RCV is the cosine between the term's occurrence vector and the relevance
//! vector, `A / (sqrt(A+B) sqrt(A+C))`. DRC weights it by `P(present | relevant)`,
//! giving `A^2 / ((A+C)^1.5 sqrt(A+B))`; within one class `A+C` is fixed, so DRC
//! ranks terms exactly like `A^2 / sqrt(A+B)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Category;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyTable { a, b, c, d }
    }

    pub fn n(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    /// Documents containing the term.
    pub fn df(&self) -> u64 {
        self.a + self.b
    }

    /// Relevant documents.
    pub fn relevant(&self) -> u64 {
        self.a + self.c
    }

    /// Some row or column total is zero, i.e. the term or the class is constant.
    pub fn has_zero_margin(&self) -> bool {
        self.a + self.b == 0 || self.c + self.d == 0 || self.a + self.c == 0 || self.b + self.d == 0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChiSquareMode {
    /// `N (AD - CB)^2 / ((A+C)(B+D)(A+B)(C+D))`
    #[default]
    Standard,
    /// Same with the numerator difference left unsquared (signed).
    Unsquared,
}

/// A chi-square value plus whether it was defined as 0 for a zero margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub value: f64,
    pub degenerate: bool,
}

pub fn chi_square(t: &ContingencyTable, mode: ChiSquareMode) -> ChiSquare {
    if t.has_zero_margin() {
        return ChiSquare {
            value: 0.0,
            degenerate: true,
        };
    }
    let (a, b, c, d) = (t.a as i128, t.b as i128, t.c as i128, t.d as i128);
    let diff = a * d - c * b;
    let denom = ((a + c) * (b + d)) as f64 * ((a + b) * (c + d)) as f64;
    let n = t.n() as f64;
    let value = match mode {
        ChiSquareMode::Standard => n * (diff * diff) as f64 / denom,
        ChiSquareMode::Unsquared => n * diff as f64 / denom,
    };
    ChiSquare {
        value,
        degenerate: false,
    }
}

/// Relevance correlation value; 0 when the term never occurs or no document is relevant.
pub fn rcv(t: &ContingencyTable) -> f64 {
    if t.df() == 0 || t.relevant() == 0 {
        return 0.0;
    }
    let denom = (t.df() as u128 * t.relevant() as u128) as f64;
    t.a as f64 / denom.sqrt()
}

/// `A^2 / sqrt(A+B)`, the per-class rank-equivalent form of [`drc`].
///
/// Computed as `sqrt(A^4 / (A+B))` so that tables with equal exact values
/// produce identical floats.
pub fn drc_rank_key(t: &ContingencyTable) -> f64 {
    if t.df() == 0 {
        return 0.0;
    }
    let a4 = (t.a as u128).pow(4) as f64;
    (a4 / t.df() as f64).sqrt()
}

/// `P(present | relevant) * RCV`; 0 when no document is relevant.
pub fn drc(t: &ContingencyTable) -> f64 {
    let rel = t.relevant();
    if rel == 0 || t.df() == 0 {
        return 0.0;
    }
    let rel = rel as f64;
    drc_rank_key(t) / (rel * rel.sqrt())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    #[default]
    Chi2,
    Drc,
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selector::Chi2 => "chi2",
            Selector::Drc => "drc",
        })
    }
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chi2" => Ok(Selector::Chi2),
            "drc" => Ok(Selector::Drc),
            other => Err(Error::Config(format!("unknown selector `{other}` (chi2|drc)"))),
        }
    }
}

impl Selector {
    pub fn score(self, t: &ContingencyTable) -> f64 {
        match self {
            Selector::Chi2 => chi_square(t, ChiSquareMode::Standard).value,
            Selector::Drc => drc(t),
        }
    }
}

/// Table for one term of the dataset's vocabulary.
pub fn contingency(data: &Dataset, term: &str, class: Category) -> Result<ContingencyTable> {
    let j = data.vocab.index_of(term)?;
    let mut t = ContingencyTable::default();
    for (row, label) in data.rows.iter().zip(&data.labels) {
        match (row.contains(j), *label == class) {
            (true, true) => t.a += 1,
            (true, false) => t.b += 1,
            (false, true) => t.c += 1,
            (false, false) => t.d += 1,
        }
    }
    Ok(t)
}

/// Tables for every vocabulary term at once, indexed like the vocabulary.
pub fn contingency_tables(data: &Dataset, class: Category) -> Vec<ContingencyTable> {
    let v = data.vocab.len();
    let mut df_rel = vec![0u64; v];
    let mut df_irr = vec![0u64; v];
    let mut n_rel = 0u64;
    for (row, label) in data.rows.iter().zip(&data.labels) {
        let counts = if *label == class {
            n_rel += 1;
            &mut df_rel
        } else {
            &mut df_irr
        };
        for &j in row.indices() {
            counts[j] += 1;
        }
    }
    let n_irr = data.len() as u64 - n_rel;
    (0..v)
        .map(|j| ContingencyTable {
            a: df_rel[j],
            b: df_irr[j],
            c: n_rel - df_rel[j],
            d: n_irr - df_irr[j],
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTerm {
    pub term: String,
    pub score: f64,
}

/// Top terms for one class, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub class: Category,
    pub method: Selector,
    pub k: usize,
    pub terms: Vec<ScoredTerm>,
}

impl FeatureRanking {
    pub fn term_list(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.term.clone()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ranking serializes")
    }
}

/// Vocabulary indices sorted by descending score, ties by ascending index.
pub fn argsort_desc(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| match scores[j].total_cmp(&scores[i]) {
        Ordering::Equal => i.cmp(&j),
        o => o,
    });
    order
}

/// Scores every term for `class` and keeps the best `k`.
///
/// Asking for more terms than the vocabulary holds returns the full ranking.
pub fn rank_features(data: &Dataset, class: Category, method: Selector, k: usize) -> Result<FeatureRanking> {
    if k == 0 {
        return Err(Error::Config("feature budget must be at least 1".into()));
    }
    if data.vocab.is_empty() {
        return Err(Error::Empty("vocabulary".into()));
    }
    if k > data.vocab.len() {
        log::warn!(
            "feature budget {k} exceeds vocabulary size {}; using the full vocabulary",
            data.vocab.len()
        );
    }
    let scores: Vec<f64> = contingency_tables(data, class)
        .iter()
        .map(|t| method.score(t))
        .collect();
    let terms = argsort_desc(&scores)
        .into_iter()
        .take(k)
        .map(|j| ScoredTerm {
            term: data.vocab.term(j).to_string(),
            score: scores[j],
        })
        .collect();
    Ok(FeatureRanking {
        class,
        method,
        k,
        terms,
    })
}
