//! One binary member per category, each with its own selected vocabulary.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lr::{train_lr, LrModel, LrParams};
use super::nb::{train_nb, NbModel};
use super::svm::{train_svm, SvmModel, SvmParams};
use crate::corpus::Category;
use crate::dataset::{Dataset, LabeledDocs};
use crate::error::{Error, Result};
use crate::feature_select::{rank_features, Selector};
use crate::preprocess::{BinaryVector, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nb,
    Lr,
    Svm,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Nb, Method::Lr, Method::Svm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Nb => "nb",
            Method::Lr => "lr",
            Method::Svm => "svm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}` (nb|lr|svm)")))
    }
}

/// Per-category feature budgets: 1000 for plot, actor/actress, analysis and
/// thumb-up-or-down; 4000 for the rest.
pub const DEFAULT_BUDGETS: [usize; Category::COUNT] = [1000, 1000, 4000, 4000, 1000, 4000, 1000, 4000];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Naive Bayes smoothing `l`.
    pub smoothing: f64,
    pub lr: LrParams,
    pub svm_c: f64,
    pub svm_epochs: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            smoothing: 1.0,
            lr: LrParams::default(),
            svm_c: SvmParams::default().c,
            svm_epochs: SvmParams::default().epochs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvrConfig {
    pub method: Method,
    pub selector: Selector,
    pub budgets: [usize; Category::COUNT],
    pub hyperparams: Hyperparams,
    pub seed: u64,
}

impl Default for OvrConfig {
    fn default() -> Self {
        OvrConfig {
            method: Method::Svm,
            selector: Selector::Chi2,
            budgets: DEFAULT_BUDGETS,
            hyperparams: Hyperparams::default(),
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BinaryModel {
    Nb(NbModel),
    Lr(LrModel),
    Svm(SvmModel),
    /// Stand-in for a category with no positive (or no negative) training example.
    Constant { positive: bool },
}

impl BinaryModel {
    /// Natural margin: NB log-odds, LR probability minus 1/2, SVM decision value.
    pub fn score(&self, x: &BinaryVector) -> Result<f64> {
        match self {
            BinaryModel::Nb(m) => m.log_odds(x),
            BinaryModel::Lr(m) => Ok(m.prob(x)? - 0.5),
            BinaryModel::Svm(m) => m.decision(x),
            BinaryModel::Constant { positive: true } => Ok(f64::INFINITY),
            BinaryModel::Constant { positive: false } => Ok(f64::NEG_INFINITY),
        }
    }
}

/// Stored form of one member; also the on-disk model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub method: Method,
    pub category: Category,
    pub vocabulary: Vocabulary,
    pub parameters: BinaryModel,
    pub hyperparameters: Hyperparams,
    pub seed: u64,
    /// Set when the member could not be trained and always answers one way.
    #[serde(default)]
    pub stub: bool,
}

impl Member {
    pub fn project<S: AsRef<str>>(&self, tokens: &[S]) -> BinaryVector {
        self.vocabulary.vectorize(tokens)
    }

    pub fn score<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        self.parameters
            .score(&self.project(tokens))
            .expect("projection stays inside the member vocabulary")
    }

    /// Relevant iff the score is `>= 0`.
    pub fn decide<S: AsRef<str>>(&self, tokens: &[S]) -> bool {
        self.score(tokens) >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvrModel {
    pub method: Method,
    pub selector: Selector,
    pub budgets: [usize; Category::COUNT],
    pub members: Vec<Member>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    method: Method,
    selector: Selector,
    budgets: [usize; Category::COUNT],
    members: Vec<String>,
}

fn member_seed(base: u64, category: Category) -> u64 {
    base.wrapping_add(category.index() as u64)
}

/// Trains one member: feature selection on `data`, then the binary learner.
pub fn train_member(data: &Dataset, category: Category, budget: usize, cfg: &OvrConfig) -> Result<Member> {
    let relevance = data.relevance(category);
    let n_pos = relevance.iter().filter(|r| **r).count();
    let seed = member_seed(cfg.seed, category);
    let hp = cfg.hyperparams;
    if n_pos == 0 || n_pos == relevance.len() {
        log::warn!("category {category} has {n_pos} of {} positives; training a constant stub", relevance.len());
        return Ok(Member {
            method: cfg.method,
            category,
            vocabulary: Vocabulary::default(),
            parameters: BinaryModel::Constant { positive: n_pos > 0 },
            hyperparameters: hp,
            seed,
            stub: true,
        });
    }

    let ranking = rank_features(data, category, cfg.selector, budget)?;
    let vocabulary = Vocabulary::from_terms(ranking.term_list());
    let remap: Vec<Option<usize>> = data.vocab.terms().iter().map(|t| vocabulary.get(t)).collect();
    let rows: Vec<BinaryVector> = data
        .rows
        .iter()
        .map(|r| BinaryVector::from_indices(r.indices().iter().filter_map(|&j| remap[j])))
        .collect();
    let dim = vocabulary.len();
    let parameters = match cfg.method {
        Method::Nb => BinaryModel::Nb(train_nb(&rows, dim, &relevance, hp.smoothing)?),
        Method::Lr => BinaryModel::Lr(train_lr(&rows, dim, &relevance, hp.lr)?),
        Method::Svm => BinaryModel::Svm(train_svm(
            &rows,
            dim,
            &relevance,
            SvmParams {
                c: hp.svm_c,
                epochs: hp.svm_epochs,
                seed,
            },
        )?),
    };
    Ok(Member {
        method: cfg.method,
        category,
        vocabulary,
        parameters,
        hyperparameters: hp,
        seed,
        stub: false,
    })
}

/// Trains all eight members; members are independent and run in parallel.
pub fn train_ovr(data: &Dataset, cfg: &OvrConfig) -> Result<OvrModel> {
    let distinct = {
        let mut seen = [false; Category::COUNT];
        data.labels.iter().for_each(|l| seen[l.index()] = true);
        seen.iter().filter(|s| **s).count()
    };
    if distinct < 2 {
        return Err(Error::SingleClass);
    }
    let members = Category::ALL
        .par_iter()
        .map(|&c| train_member(data, c, cfg.budgets[c.index()], cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(OvrModel {
        method: cfg.method,
        selector: cfg.selector,
        budgets: cfg.budgets,
        members,
    })
}

/// Convenience wrapper that builds the training vocabulary from `docs`.
pub fn train_ovr_docs(docs: &LabeledDocs, cfg: &OvrConfig) -> Result<OvrModel> {
    train_ovr(&docs.to_dataset(), cfg)
}

impl OvrModel {
    pub fn member(&self, category: Category) -> &Member {
        self.members
            .iter()
            .find(|m| m.category == category)
            .expect("one member per category")
    }

    /// Highest-scoring category; ties go to the lowest category index.
    pub fn predict<S: AsRef<str>>(&self, tokens: &[S]) -> Category {
        let mut scores = [f64::NEG_INFINITY; Category::COUNT];
        for m in &self.members {
            scores[m.category.index()] = m.score(tokens);
        }
        let mut best = 0;
        for (i, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = i;
            }
        }
        Category::ALL[best]
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut names = Vec::new();
        for m in &self.members {
            let name = format!("member_{}.json", m.category.index());
            crate::io::write_atomic(&dir.join(&name), &crate::io::to_json_pretty(m, "model member")?)?;
            names.push(name);
        }
        let manifest = Manifest {
            method: self.method,
            selector: self.selector,
            budgets: self.budgets,
            members: names,
        };
        crate::io::write_atomic(&dir.join("manifest.json"), &crate::io::to_json_pretty(&manifest, "model manifest")?)
    }

    pub fn load(dir: &Path) -> Result<OvrModel> {
        let manifest: Manifest = serde_json::from_str(&crate::io::read_to_string(&dir.join("manifest.json"))?)
            .map_err(|e| Error::json("model manifest", e))?;
        let members = manifest
            .members
            .iter()
            .map(|name| {
                serde_json::from_str::<Member>(&crate::io::read_to_string(&dir.join(name))?)
                    .map_err(|e| Error::json(name.clone(), e))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut seen: Vec<Category> = members.iter().map(|m| m.category).collect();
        seen.sort();
        if seen != Category::ALL {
            return Err(Error::Config("model directory must hold one member per category".into()));
        }
        Ok(OvrModel {
            method: manifest.method,
            selector: manifest.selector,
            budgets: manifest.budgets,
            members,
        })
    }
}
