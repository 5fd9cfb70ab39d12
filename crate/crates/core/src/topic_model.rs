//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//!
//! Each token's topic is resampled from
//! `(n_dk + alpha) (n_kw + beta) / (n_k + V beta)` with its own assignment
//! removed from the counts. The returned distributions are the smoothed,
//! normalized counts after the final sweep.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// `alpha = 50 / K`, `beta = 0.01`, 1000 sweeps.
    pub fn new(topics: usize, seed: u64) -> Self {
        LdaConfig {
            topics,
            alpha: 50.0 / topics.max(1) as f64,
            beta: 0.01,
            iterations: 1000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.topics == 0 {
            return Err(Error::Config("topic count must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) || !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!(
                "priors must be positive (alpha {}, beta {})",
                self.alpha, self.beta
            )));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig::new(8, 42)
    }
}

/// Sampler state over documents of word ids.
#[derive(Debug, Clone)]
pub struct GibbsState {
    topics: usize,
    vocab_size: usize,
    alpha: f64,
    beta: f64,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    /// `topic_word[k * V + w]`
    topic_word: Vec<u64>,
    topic_total: Vec<u64>,
    /// `doc_topic[d * K + k]`
    doc_topic: Vec<u64>,
    rng: ChaCha8Rng,
    weights: Vec<f64>,
}

impl GibbsState {
    /// Random initial assignment of every token.
    pub fn init(docs: Vec<Vec<usize>>, vocab_size: usize, cfg: &LdaConfig) -> Result<Self> {
        cfg.validate()?;
        let k = cfg.topics;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut topic_word = vec![0; k * vocab_size];
        let mut topic_total = vec![0; k];
        let mut doc_topic = vec![0; k * docs.len()];
        let mut assignments = Vec::with_capacity(docs.len());
        for (d, doc) in docs.iter().enumerate() {
            let mut z = Vec::with_capacity(doc.len());
            for &w in doc {
                if w >= vocab_size {
                    return Err(Error::DimensionMismatch {
                        expected: vocab_size,
                        got: w,
                    });
                }
                let t = rng.gen_range(0..k);
                topic_word[t * vocab_size + w] += 1;
                topic_total[t] += 1;
                doc_topic[d * k + t] += 1;
                z.push(t);
            }
            assignments.push(z);
        }
        Ok(GibbsState {
            topics: k,
            vocab_size,
            alpha: cfg.alpha,
            beta: cfg.beta,
            docs,
            assignments,
            topic_word,
            topic_total,
            doc_topic,
            rng,
            weights: vec![0.0; k],
        })
    }

    /// One pass over every token in document order.
    pub fn sweep(&mut self) {
        let k = self.topics;
        let v = self.vocab_size;
        let vbeta = v as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.topic_word[old * v + w] -= 1;
                self.topic_total[old] -= 1;
                self.doc_topic[d * k + old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    let p = (self.doc_topic[d * k + t] as f64 + self.alpha) * (self.topic_word[t * v + w] as f64 + self.beta)
                        / (self.topic_total[t] as f64 + vbeta);
                    total += p;
                    self.weights[t] = total;
                }
                let u = self.rng.gen::<f64>() * total;
                let new = self.weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                self.topic_word[new * v + w] += 1;
                self.topic_total[new] += 1;
                self.doc_topic[d * k + new] += 1;
                self.assignments[d][i] = new;
            }
        }
    }

    pub fn token_count(&self) -> u64 {
        self.docs.iter().map(|d| d.len() as u64).sum()
    }

    /// Checks that both count matrices agree with the assignments.
    pub fn counts_consistent(&self) -> bool {
        let n = self.token_count();
        let tw: u64 = self.topic_word.iter().sum();
        let tt: u64 = self.topic_total.iter().sum();
        let dt: u64 = self.doc_topic.iter().sum();
        if tw != n || tt != n || dt != n {
            return false;
        }
        let k = self.topics;
        self.assignments.iter().enumerate().all(|(d, z)| {
            let mut per = vec![0u64; k];
            z.iter().for_each(|&t| per[t] += 1);
            per == self.doc_topic[d * k..(d + 1) * k]
        })
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.assignments
    }

    /// Smoothed topic-word rows.
    pub fn topic_word(&self) -> Vec<Vec<f64>> {
        let v = self.vocab_size;
        let denom_extra = v as f64 * self.beta;
        (0..self.topics)
            .map(|t| {
                let denom = self.topic_total[t] as f64 + denom_extra;
                self.topic_word[t * v..(t + 1) * v]
                    .iter()
                    .map(|&c| (c as f64 + self.beta) / denom)
                    .collect()
            })
            .collect()
    }

    /// Smoothed document-topic rows.
    pub fn doc_topic(&self) -> Vec<Vec<f64>> {
        let k = self.topics;
        let extra = k as f64 * self.alpha;
        self.docs
            .iter()
            .enumerate()
            .map(|(d, doc)| {
                let denom = doc.len() as f64 + extra;
                self.doc_topic[d * k..(d + 1) * k]
                    .iter()
                    .map(|&c| (c as f64 + self.alpha) / denom)
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    #[serde(rename = "K")]
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
    pub vocab: Vocabulary,
    pub doc_ids: Vec<String>,
    pub topic_word: Vec<Vec<f64>>,
    pub doc_topic: Vec<Vec<f64>>,
    #[serde(skip)]
    pub assignments: Vec<Vec<usize>>,
}

/// Fits LDA to `(id, tokens)` documents. Documents without tokens are
/// reported and left out of the model.
pub fn fit_lda(docs: &[(String, Vec<String>)], cfg: &LdaConfig) -> Result<LdaModel> {
    fit_lda_checked(docs, cfg, |_| {})
}

/// As [`fit_lda`], calling `after_sweep` with the sampler state after every sweep.
pub fn fit_lda_checked(
    docs: &[(String, Vec<String>)],
    cfg: &LdaConfig,
    mut after_sweep: impl FnMut(&GibbsState),
) -> Result<LdaModel> {
    cfg.validate()?;
    let mut kept = Vec::new();
    for (id, tokens) in docs {
        if tokens.is_empty() {
            log::warn!("document `{id}` has no tokens; excluded from the topic model");
        } else {
            kept.push((id, tokens));
        }
    }
    if kept.is_empty() {
        return Err(Error::Empty("topic model corpus has no non-empty documents".into()));
    }
    let vocab = Vocabulary::build(kept.iter().map(|(_, t)| t.as_slice()));
    let ids: Vec<Vec<usize>> = kept
        .iter()
        .map(|(_, t)| t.iter().map(|w| vocab.get(w).expect("built from these docs")).collect())
        .collect();
    let mut state = GibbsState::init(ids, vocab.len(), cfg)?;
    for _ in 0..cfg.iterations {
        state.sweep();
        after_sweep(&state);
    }
    Ok(LdaModel {
        topics: cfg.topics,
        alpha: cfg.alpha,
        beta: cfg.beta,
        seed: cfg.seed,
        iterations: cfg.iterations,
        vocab,
        doc_ids: kept.iter().map(|(id, _)| (*id).clone()).collect(),
        topic_word: state.topic_word(),
        doc_topic: state.doc_topic(),
        assignments: state.assignments().to_vec(),
    })
}

impl LdaModel {
    /// The `n` most probable words of `topic`, descending; ties by vocabulary index.
    pub fn top_words(&self, topic: usize, n: usize) -> Result<Vec<(String, f64)>> {
        let row = self
            .topic_word
            .get(topic)
            .ok_or_else(|| Error::Config(format!("topic {topic} out of range (K = {})", self.topics)))?;
        Ok(crate::feature_select::argsort_desc(row)
            .into_iter()
            .take(n)
            .map(|j| (self.vocab.term(j).to_string(), row[j]))
            .collect())
    }

    /// `doc_id,topic_0,...` rows with 6-decimal values.
    pub fn heatmap_csv(&self) -> String {
        let mut out = String::from("doc_id");
        for k in 0..self.topics {
            write!(out, ",topic_{k}").unwrap();
        }
        out.push('\n');
        for (id, row) in self.doc_ids.iter().zip(&self.doc_topic) {
            out.push_str(&csv_field(id));
            for p in row {
                write!(out, ",{p:.6}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn export_heatmap(&self, path: &Path) -> Result<()> {
        crate::io::write_atomic(path, self.heatmap_csv().as_bytes())
    }

    /// Plain-text listing of the top `n` words per topic.
    pub fn top_words_listing(&self, n: usize) -> String {
        let mut out = String::new();
        for k in 0..self.topics {
            let words = self.top_words(k, n.min(self.vocab.len())).expect("topic in range");
            let joined: Vec<String> = words.iter().map(|(w, p)| format!("{w}:{p:.6}")).collect();
            writeln!(out, "topic_{k}\t{}", joined.join(" ")).unwrap();
        }
        out
    }
}

/// Quotes a CSV field when it holds a comma, quote or line break.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
