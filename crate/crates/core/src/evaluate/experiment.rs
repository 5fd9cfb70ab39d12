//! Feature-size sweeps and cross-series generalization runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{accuracy, binary_accuracy};
use crate::classify::{train_member, train_ovr, Hyperparams, LrParams, Method, OvrConfig, OvrModel, DEFAULT_BUDGETS};
use crate::corpus::{Category, Corpus};
use crate::dataset::{LabeledDocs, TokenizedCorpus};
use crate::error::{Error, Result};
use crate::feature_select::Selector;
use crate::preprocess::{KnowledgeBase, Preprocessor, Segmenter, StopList, WhitespaceSegmenter};
use crate::topic_model::csv_field;

/// Segmenter and stop list shared by every run of an experiment.
#[derive(Clone)]
pub struct Pipeline {
    pub segmenter: Arc<dyn Segmenter>,
    pub stoplist: StopList,
}

impl Pipeline {
    pub fn new(segmenter: Arc<dyn Segmenter>, stoplist: StopList) -> Self {
        Pipeline { segmenter, stoplist }
    }

    /// Whitespace segmentation with the built-in stop list.
    pub fn whitespace() -> Self {
        Pipeline::new(Arc::new(WhitespaceSegmenter), StopList::builtin())
    }

    pub fn preprocessor(&self, kbs: Option<&[KnowledgeBase]>) -> Result<Preprocessor> {
        let pre = Preprocessor::new(self.segmenter.clone(), self.stoplist.clone());
        match kbs {
            Some(kbs) => pre.with_knowledge_bases(kbs),
            None => Ok(pre),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rotation {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl Rotation {
    /// `a&b-c`
    pub fn label(&self) -> String {
        format!("{}-{}", self.train.join("&"), self.test.join("&"))
    }

    /// Leave-one-out rotations over the sorted series names, holding out the
    /// last series first: for `a, b, c` that is `a&b-c`, `a&c-b`, `b&c-a`.
    pub fn leave_one_out<S: AsRef<str>>(series: &[S]) -> Vec<Rotation> {
        let mut names: Vec<String> = series.iter().map(|s| s.as_ref().to_string()).collect();
        names.sort();
        names.dedup();
        (0..names.len())
            .rev()
            .map(|held| Rotation {
                train: names.iter().enumerate().filter(|(i, _)| *i != held).map(|(_, s)| s.clone()).collect(),
                test: vec![names[held].clone()],
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Learners averaged in the cross-series table.
    pub methods: Vec<Method>,
    /// Learner used by the feature-size sweep.
    pub sweep_method: Method,
    pub selector: Selector,
    /// Feature sizes of the sweep, strictly ascending.
    pub sizes: Vec<usize>,
    /// Per-category feature budgets of the cross-series runs.
    pub budgets: [usize; Category::COUNT],
    /// Empty means leave-one-out over the corpus series.
    pub rotations: Vec<Rotation>,
    /// Substitution mode of the sweep.
    pub surrogate: bool,
    /// Keep at most this many agreed reviews per series, in file order.
    pub per_series_limit: Option<usize>,
    pub hyperparams: Hyperparams,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            methods: Method::ALL.to_vec(),
            sweep_method: Method::Svm,
            selector: Selector::Chi2,
            sizes: vec![250, 500, 1000, 2000, 4000],
            budgets: DEFAULT_BUDGETS,
            rotations: Vec::new(),
            surrogate: true,
            per_series_limit: None,
            hyperparams: Hyperparams {
                lr: LrParams {
                    eta: 2.0,
                    ..LrParams::default()
                },
                ..Hyperparams::default()
            },
            seed: 42,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("no classifier methods configured".into()));
        }
        if self.sizes.is_empty() || self.sizes[0] == 0 || self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "feature sizes must be positive and strictly ascending, got {:?}",
                self.sizes
            )));
        }
        if self.budgets.contains(&0) {
            return Err(Error::Config("feature budgets must be positive".into()));
        }
        for r in &self.rotations {
            if r.train.is_empty() || r.test.is_empty() {
                return Err(Error::Config(format!("rotation {} needs train and test series", r.label())));
            }
            if let Some(s) = r.train.iter().find(|s| r.test.contains(s)) {
                return Err(Error::OverlappingSplit(s.clone()));
            }
        }
        Ok(())
    }

    fn ovr_config(&self, method: Method) -> OvrConfig {
        OvrConfig {
            method,
            selector: self.selector,
            budgets: self.budgets,
            hyperparams: self.hyperparams,
            seed: self.seed,
        }
    }

    fn resolve_rotations(&self, corpus: &Corpus) -> Result<Vec<Rotation>> {
        let rotations = if self.rotations.is_empty() {
            Rotation::leave_one_out(&corpus.series_names())
        } else {
            self.rotations.clone()
        };
        for r in &rotations {
            for s in r.train.iter().chain(&r.test) {
                if !corpus.series_index().contains_key(s) {
                    return Err(Error::UnknownSeries(s.clone()));
                }
            }
        }
        Ok(rotations)
    }
}

/// Agreed reviews, optionally capped per series.
fn experiment_corpus(corpus: &Corpus, cfg: &ExperimentConfig) -> Corpus {
    let (agreed, report) = corpus.agreement_filter();
    if report.dropped() > 0 {
        log::info!("agreement filter dropped {} of {} reviews", report.dropped(), report.input);
    }
    match cfg.per_series_limit {
        Some(limit) => agreed.take_per_series(limit),
        None => agreed,
    }
}

/// Training and test documents of one rotation.
pub fn rotation_docs(tokens: &TokenizedCorpus, rotation: &Rotation) -> Result<(LabeledDocs, LabeledDocs)> {
    let train = tokens.filter_series(&rotation.train).labeled();
    let test = tokens.filter_series(&rotation.test).labeled();
    if train.is_empty() || test.is_empty() {
        return Err(Error::Empty(format!("rotation {} has no labeled train or test reviews", rotation.label())));
    }
    Ok((train, test))
}

/// Trains on the rotation's training series only; test texts never reach
/// feature selection or training.
pub fn fit_rotation(tokens: &TokenizedCorpus, rotation: &Rotation, cfg: &OvrConfig) -> Result<(OvrModel, LabeledDocs)> {
    let (train, test) = rotation_docs(tokens, rotation)?;
    Ok((train_ovr(&train.to_dataset(), cfg)?, test))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub category: Category,
    pub size: usize,
    pub train_acc: f64,
    pub test_acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rotation: String,
    pub method: Method,
    pub vocabulary_size: usize,
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,size,train_acc,test_acc\n");
        for c in &self.cells {
            writeln!(out, "{},{},{:.6},{:.6}", csv_field(c.category.name()), c.size, c.train_acc, c.test_acc).unwrap();
        }
        out
    }

    pub fn cell(&self, category: Category, size: usize) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.category == category && c.size == size)
    }
}

/// Train and test binary accuracy of every category's member at every
/// feature size, on the first configured rotation. Sizes above the
/// vocabulary size use the whole vocabulary and keep their configured label.
pub fn feature_size_sweep(
    corpus: &Corpus,
    kbs: &[KnowledgeBase],
    pipeline: &Pipeline,
    cfg: &ExperimentConfig,
) -> Result<SweepTable> {
    cfg.validate()?;
    let corpus = experiment_corpus(corpus, cfg);
    let rotation = cfg
        .resolve_rotations(&corpus)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Config("the sweep needs at least two series".into()))?;
    let pre = pipeline.preprocessor(cfg.surrogate.then_some(kbs))?;
    let tokens = TokenizedCorpus::from_corpus(&corpus, &pre)?;
    let (train, test) = rotation_docs(&tokens, &rotation)?;
    let data = train.to_dataset();
    if let Some(&largest) = cfg.sizes.last() {
        if largest > data.vocab.len() {
            log::warn!(
                "feature sizes above the training vocabulary ({}) use the full vocabulary",
                data.vocab.len()
            );
        }
    }
    let ovr = cfg.ovr_config(cfg.sweep_method);
    let jobs: Vec<(Category, usize)> = Category::ALL
        .iter()
        .flat_map(|&c| cfg.sizes.iter().map(move |&s| (c, s)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(category, size)| {
            let member = train_member(&data, category, size, &ovr)?;
            Ok(SweepCell {
                category,
                size,
                train_acc: binary_accuracy(&member, &train, category)?,
                test_acc: binary_accuracy(&member, &test, category)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        rotation: rotation.label(),
        method: cfg.sweep_method,
        vocabulary_size: data.vocab.len(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSeriesCell {
    pub category: Category,
    pub rotation: String,
    pub surrogate: bool,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCell {
    pub category: Category,
    pub rotation: String,
    pub surrogate: bool,
    pub method: Method,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassCell {
    pub rotation: String,
    pub surrogate: bool,
    pub method: Method,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSeriesTable {
    pub rotations: Vec<String>,
    pub methods: Vec<Method>,
    /// Binary accuracy averaged over the methods.
    pub cells: Vec<CrossSeriesCell>,
    pub per_method: Vec<MethodCell>,
    pub multiclass: Vec<MulticlassCell>,
}

fn mode_name(on: bool) -> &'static str {
    if on {
        "on"
    } else {
        "off"
    }
}

impl CrossSeriesTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,rotation,surrogate,accuracy\n");
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{:.6}",
                csv_field(c.category.name()),
                csv_field(&c.rotation),
                mode_name(c.surrogate),
                c.accuracy
            )
            .unwrap();
        }
        out
    }

    pub fn per_method_csv(&self) -> String {
        let mut out = String::from("category,rotation,surrogate,method,accuracy\n");
        for c in &self.per_method {
            writeln!(
                out,
                "{},{},{},{},{:.6}",
                csv_field(c.category.name()),
                csv_field(&c.rotation),
                mode_name(c.surrogate),
                c.method,
                c.accuracy
            )
            .unwrap();
        }
        out
    }

    pub fn multiclass_csv(&self) -> String {
        let mut out = String::from("rotation,surrogate,method,accuracy\n");
        for c in &self.multiclass {
            writeln!(
                out,
                "{},{},{},{:.6}",
                csv_field(&c.rotation),
                mode_name(c.surrogate),
                c.method,
                c.accuracy
            )
            .unwrap();
        }
        out
    }

    pub fn accuracy(&self, category: Category, rotation: &str, surrogate: bool) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.category == category && c.rotation == rotation && c.surrogate == surrogate)
            .map(|c| c.accuracy)
    }

    /// Mean over rotations of the method-averaged accuracy.
    pub fn mean_accuracy(&self, category: Category, surrogate: bool) -> f64 {
        let vals: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| c.category == category && c.surrogate == surrogate)
            .map(|c| c.accuracy)
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }
}

struct RunResult {
    binary: [f64; Category::COUNT],
    multiclass: f64,
}

fn run_one(tokens: &TokenizedCorpus, rotation: &Rotation, cfg: &OvrConfig) -> Result<RunResult> {
    let (model, test) = fit_rotation(tokens, rotation, cfg)?;
    let mut binary = [0.0; Category::COUNT];
    for c in Category::ALL {
        binary[c.index()] = binary_accuracy(model.member(c), &test, c)?;
    }
    let predicted: Vec<Category> = test.tokens.iter().map(|t| model.predict(t)).collect();
    Ok(RunResult {
        binary,
        multiclass: accuracy(&predicted, &test.labels)?,
    })
}

/// Per category, rotation and substitution mode: binary accuracy on the
/// held-out series, averaged over the configured methods.
pub fn cross_series_experiment(
    corpus: &Corpus,
    kbs: &[KnowledgeBase],
    pipeline: &Pipeline,
    cfg: &ExperimentConfig,
) -> Result<CrossSeriesTable> {
    cfg.validate()?;
    let corpus = experiment_corpus(corpus, cfg);
    if corpus.series_index().len() < 3 {
        return Err(Error::Config(format!(
            "cross-series runs need at least 3 series, found {}",
            corpus.series_index().len()
        )));
    }
    let rotations = cfg.resolve_rotations(&corpus)?;
    let off = TokenizedCorpus::from_corpus(&corpus, &pipeline.preprocessor(None)?)?;
    let on = TokenizedCorpus::from_corpus(&corpus, &pipeline.preprocessor(Some(kbs))?)?;

    let jobs: Vec<(bool, usize, Method)> = [false, true]
        .iter()
        .flat_map(|&mode| {
            (0..rotations.len()).flat_map(move |r| cfg.methods.iter().map(move |&m| (mode, r, m)))
        })
        .collect();
    let results: BTreeMap<(bool, usize, Method), RunResult> = jobs
        .par_iter()
        .map(|&(mode, r, method)| {
            let tokens = if mode { &on } else { &off };
            run_one(tokens, &rotations[r], &cfg.ovr_config(method)).map(|res| ((mode, r, method), res))
        })
        .collect::<Result<_>>()?;

    let mut table = CrossSeriesTable {
        rotations: rotations.iter().map(Rotation::label).collect(),
        methods: cfg.methods.clone(),
        cells: Vec::new(),
        per_method: Vec::new(),
        multiclass: Vec::new(),
    };
    for c in Category::ALL {
        for (r, label) in table.rotations.iter().enumerate() {
            for mode in [false, true] {
                let mut sum = 0.0;
                for &method in &cfg.methods {
                    let acc = results[&(mode, r, method)].binary[c.index()];
                    sum += acc;
                    table.per_method.push(MethodCell {
                        category: c,
                        rotation: label.clone(),
                        surrogate: mode,
                        method,
                        accuracy: acc,
                    });
                }
                table.cells.push(CrossSeriesCell {
                    category: c,
                    rotation: label.clone(),
                    surrogate: mode,
                    accuracy: sum / cfg.methods.len() as f64,
                });
            }
        }
    }
    for (r, label) in table.rotations.iter().enumerate() {
        for mode in [false, true] {
            for &method in &cfg.methods {
                table.multiclass.push(MulticlassCell {
                    rotation: label.clone(),
                    surrogate: mode,
                    method,
                    accuracy: results[&(mode, r, method)].multiclass,
                });
            }
        }
    }
    Ok(table)
}
