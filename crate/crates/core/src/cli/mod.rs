//! The `tvreview` command line.
//!
//! Every command writes its outputs atomically into `--out-dir` together
//! with `run_manifest.json` (effective config, input digests, outputs).
//! Exit status is 0 on success, 1 on runtime failure and 2 on bad usage or
//! invalid input.

mod config;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{FileConfig, Run, SegmenterKind, MANIFEST_FILE};

use crate::classify::{Hyperparams, LrParams, Method, OvrConfig, OvrModel, DEFAULT_BUDGETS};
use crate::corpus::{Category, Corpus};
use crate::dataset::TokenizedCorpus;
use crate::error::{Error, Result};
use crate::evaluate::{
    accuracy, binary_accuracy, cross_series_experiment, feature_size_sweep, generate_synthetic, ExperimentConfig,
    Pipeline, SyntheticSpec,
};
use crate::feature_select::Selector;
use crate::preprocess::{DictionarySegmenter, KnowledgeBase, Segmenter, StopList, WhitespaceSegmenter};
use crate::topic_model::{csv_field, fit_lda, LdaConfig};

#[derive(Debug, Parser)]
#[command(name = "tvreview", version, about = "Generic TV-series review classification")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON config file; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Only log errors.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct TextArgs {
    /// Corpus file (JSON Lines).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Directory of knowledge-base JSON files, one per series.
    #[arg(long)]
    pub kb_dir: Option<PathBuf>,
    /// Knowledge-base file; may be repeated.
    #[arg(long)]
    pub kb: Vec<PathBuf>,
    /// Stop-word file; the built-in list is used otherwise.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Dictionary for the dictionary segmenter.
    #[arg(long)]
    pub dict: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub segmenter: Option<SegmenterKind>,
    #[arg(long, value_enum)]
    pub surrogates: Option<OnOff>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub selector: Option<Selector>,
    /// Naive Bayes smoothing.
    #[arg(long)]
    pub smoothing: Option<f64>,
    #[arg(long)]
    pub lr_eta: Option<f64>,
    #[arg(long)]
    pub lr_lambda: Option<f64>,
    #[arg(long)]
    pub lr_epochs: Option<usize>,
    #[arg(long)]
    pub svm_c: Option<f64>,
    #[arg(long)]
    pub svm_epochs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus and keep reviews whose annotators agree.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Substitute names, segment and remove stop words.
    Preprocess {
        #[command(flatten)]
        text: TextArgs,
    },
    /// Fit an LDA topic model to a tokenized corpus.
    Lda {
        #[arg(long)]
        tokens: PathBuf,
        #[arg(long)]
        topics: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Words listed per topic.
        #[arg(long)]
        top_n: Option<usize>,
    },
    /// Train the eight one-vs-rest members on a tokenized corpus.
    Train {
        #[arg(long)]
        tokens: PathBuf,
        #[arg(long)]
        method: Option<Method>,
        /// Eight per-category feature budgets, in category order.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Score a trained model on a tokenized corpus.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        tokens: PathBuf,
    },
    /// Accuracy against feature-set size for every category.
    Sweep {
        #[command(flatten)]
        text: TextArgs,
        #[arg(long)]
        method: Option<Method>,
        /// Feature sizes, strictly ascending.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Train on two series, test on the third, with and without substitution.
    CrossSeries {
        #[command(flatten)]
        text: TextArgs,
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        /// Eight per-category feature budgets, in category order.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        per_series_limit: Option<usize>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Generate a synthetic corpus and its knowledge bases.
    Synth {
        /// Full generator spec (JSON); overrides the built-in one.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        series: Option<usize>,
        #[arg(long)]
        reviews: Option<usize>,
        #[arg(long)]
        mention_rate: Option<f64>,
        #[arg(long)]
        planted_rate: Option<f64>,
    },
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = if cli.common.quiet { "error" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.common.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let seed = cli.common.seed.or(file.seed).unwrap_or(42);
    let out = cli.common.out_dir.as_path();
    let mut run = Run::new(command_name(&cli.command), out, seed);
    if let Some(p) = &cli.common.config {
        run.input(p)?;
    }
    match cli.command {
        Command::Ingest { corpus } => cmd_ingest(&mut run, &corpus)?,
        Command::Preprocess { text } => cmd_preprocess(&mut run, &file, &text)?,
        Command::Lda {
            tokens,
            topics,
            alpha,
            beta,
            iterations,
            top_n,
        } => {
            let topics = topics.or(file.lda.topics).unwrap_or(8);
            let defaults = LdaConfig::new(topics, seed);
            let cfg = LdaConfig {
                topics,
                alpha: alpha.or(file.lda.alpha).unwrap_or(defaults.alpha),
                beta: beta.or(file.lda.beta).unwrap_or(defaults.beta),
                iterations: iterations.or(file.lda.iterations).unwrap_or(defaults.iterations),
                seed,
            };
            let top_n = top_n.or(file.lda.top_n).unwrap_or(20);
            cmd_lda(&mut run, &tokens, &cfg, top_n)?
        }
        Command::Train {
            tokens,
            method,
            sizes,
            model,
        } => {
            let cfg = OvrConfig {
                method: method.or(file.model.method).unwrap_or(Method::Svm),
                selector: model.selector.or(file.model.selector).unwrap_or(Selector::Chi2),
                budgets: budgets(sizes.or(file.model.budgets.clone()))?,
                hyperparams: hyperparams(&model, &file, Hyperparams::default()),
                seed,
            };
            cmd_train(&mut run, &tokens, &cfg)?
        }
        Command::Evaluate { model, tokens } => cmd_evaluate(&mut run, &model, &tokens)?,
        Command::Sweep {
            text,
            method,
            sizes,
            model,
        } => {
            let mut cfg = experiment_config(&model, &file, seed);
            if let Some(m) = method.or(file.experiment.sweep_method) {
                cfg.sweep_method = m;
            }
            if let Some(s) = sizes.or(file.experiment.sizes.clone()) {
                cfg.sizes = s;
            }
            cmd_experiment(&mut run, &file, &text, &cfg, false)?
        }
        Command::CrossSeries {
            text,
            methods,
            sizes,
            per_series_limit,
            model,
        } => {
            let mut cfg = experiment_config(&model, &file, seed);
            if let Some(m) = methods.or(file.experiment.methods.clone()) {
                cfg.methods = m;
            }
            cfg.budgets = budgets(sizes.or(file.model.budgets.clone()))?;
            cfg.per_series_limit = per_series_limit.or(file.experiment.per_series_limit);
            cmd_experiment(&mut run, &file, &text, &cfg, true)?
        }
        Command::Synth {
            spec,
            series,
            reviews,
            mention_rate,
            planted_rate,
        } => {
            let mut s = match &spec {
                Some(p) => {
                    run.input(p)?;
                    serde_json::from_str::<SyntheticSpec>(&crate::io::read_to_string(p)?)
                        .map_err(|e| Error::json(format!("synthetic spec {}", p.display()), e))?
                }
                None => SyntheticSpec::standard(
                    series.or(file.synth.series).unwrap_or(3),
                    reviews.or(file.synth.reviews).unwrap_or(200),
                    seed,
                ),
            };
            if cli.common.seed.is_some() || file.seed.is_some() || spec.is_none() {
                s.seed = seed;
            }
            if let Some(r) = mention_rate.or(file.synth.mention_rate) {
                s = s.with_mention_rate(r);
            }
            if let Some(r) = planted_rate.or(file.synth.planted_rate) {
                s.planted_rate = r;
            }
            cmd_synth(&mut run, &s)?
        }
    }
    run.finish()
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Ingest { .. } => "ingest",
        Command::Preprocess { .. } => "preprocess",
        Command::Lda { .. } => "lda",
        Command::Train { .. } => "train",
        Command::Evaluate { .. } => "evaluate",
        Command::Sweep { .. } => "sweep",
        Command::CrossSeries { .. } => "cross-series",
        Command::Synth { .. } => "synth",
    }
}

fn budgets(sizes: Option<Vec<usize>>) -> Result<[usize; Category::COUNT]> {
    match sizes {
        None => Ok(DEFAULT_BUDGETS),
        Some(v) => {
            let arr: [usize; Category::COUNT] = v.as_slice().try_into().map_err(|_| {
                Error::Config(format!("expected {} feature budgets, got {}", Category::COUNT, v.len()))
            })?;
            if arr.contains(&0) {
                return Err(Error::Config("feature budgets must be positive".into()));
            }
            Ok(arr)
        }
    }
}

fn hyperparams(m: &ModelArgs, file: &FileConfig, base: Hyperparams) -> Hyperparams {
    let f = &file.model;
    Hyperparams {
        smoothing: m.smoothing.or(f.smoothing).unwrap_or(base.smoothing),
        lr: LrParams {
            eta: m.lr_eta.or(f.lr_eta).unwrap_or(base.lr.eta),
            lambda: m.lr_lambda.or(f.lr_lambda).unwrap_or(base.lr.lambda),
            epochs: m.lr_epochs.or(f.lr_epochs).unwrap_or(base.lr.epochs),
        },
        svm_c: m.svm_c.or(f.svm_c).unwrap_or(base.svm_c),
        svm_epochs: m.svm_epochs.or(f.svm_epochs).unwrap_or(base.svm_epochs),
    }
}

fn experiment_config(m: &ModelArgs, file: &FileConfig, seed: u64) -> ExperimentConfig {
    let base = ExperimentConfig::default();
    ExperimentConfig {
        selector: m.selector.or(file.model.selector).unwrap_or(base.selector),
        budgets: base.budgets,
        hyperparams: hyperparams(m, file, base.hyperparams),
        seed,
        ..base
    }
}

#[derive(Serialize)]
struct IngestReport {
    input: usize,
    kept: usize,
    dropped_disagreement: usize,
    dropped_too_few_annotations: usize,
    kept_per_series: std::collections::BTreeMap<String, usize>,
}

fn cmd_ingest(run: &mut Run, corpus: &Path) -> Result<()> {
    run.input(corpus)?;
    let (kept, report) = Corpus::load(corpus)?.agreement_filter();
    let summary = IngestReport {
        input: report.input,
        kept: report.kept,
        dropped_disagreement: report.dropped_disagreement,
        dropped_too_few_annotations: report.dropped_too_few_annotations,
        kept_per_series: kept.series_index().iter().map(|(s, v)| (s.clone(), v.len())).collect(),
    };
    run.set_config(&serde_json::json!({ "corpus": corpus }))?;
    run.write("corpus.filtered.jsonl", kept.to_jsonl().as_bytes())?;
    run.write("ingest_report.json", &crate::io::to_json_pretty(&summary, "ingest report")?)?;
    log::info!("kept {} of {} reviews", report.kept, report.input);
    Ok(())
}

#[derive(Serialize)]
struct TextConfig {
    corpus: PathBuf,
    segmenter: SegmenterKind,
    dict: Option<PathBuf>,
    stopwords: Option<PathBuf>,
    surrogates: bool,
    knowledge_bases: Vec<PathBuf>,
}

/// Resolves the text-processing flags and loads every file they name.
fn text_setup(run: &mut Run, file: &FileConfig, t: &TextArgs) -> Result<(TextConfig, Pipeline, Vec<KnowledgeBase>)> {
    let f = &file.preprocess;
    let dict = t.dict.clone().or(f.dict.clone());
    let stopwords = t.stopwords.clone().or(f.stopwords.clone());
    let segmenter_kind = t.segmenter.or(f.segmenter).unwrap_or(SegmenterKind::Dict);
    let surrogates = t.surrogates.map(|s| s == OnOff::On).or(f.surrogates).unwrap_or(true);

    let segmenter: Arc<dyn Segmenter> = match segmenter_kind {
        SegmenterKind::Whitespace => Arc::new(WhitespaceSegmenter),
        SegmenterKind::Dict => match &dict {
            Some(p) => {
                run.input(p)?;
                Arc::new(DictionarySegmenter::load(p)?)
            }
            None => Arc::new(DictionarySegmenter::new(std::iter::empty::<&str>())),
        },
    };
    let stoplist = match &stopwords {
        Some(p) => {
            run.input(p)?;
            StopList::load(p)?
        }
        None => StopList::builtin(),
    };

    let mut kb_paths = t.kb.clone();
    if let Some(dir) = t.kb_dir.clone().or(f.kb_dir.clone()) {
        let entries = std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut found = Vec::new();
        for entry in entries {
            let p = entry.map_err(|e| Error::io(&dir, e))?.path();
            if p.extension().is_some_and(|x| x == "json") {
                found.push(p);
            }
        }
        found.sort();
        kb_paths.extend(found);
    }
    let mut kbs = Vec::new();
    for p in &kb_paths {
        run.input(p)?;
        kbs.push(KnowledgeBase::load(p)?);
    }
    run.input(&t.corpus)?;
    let cfg = TextConfig {
        corpus: t.corpus.clone(),
        segmenter: segmenter_kind,
        dict,
        stopwords,
        surrogates,
        knowledge_bases: kb_paths,
    };
    Ok((cfg, Pipeline::new(segmenter, stoplist), kbs))
}

fn cmd_preprocess(run: &mut Run, file: &FileConfig, t: &TextArgs) -> Result<()> {
    let (cfg, pipeline, kbs) = text_setup(run, file, t)?;
    let corpus = Corpus::load(&t.corpus)?;
    let pre = pipeline.preprocessor(cfg.surrogates.then_some(kbs.as_slice()))?;
    let tokens = TokenizedCorpus::from_corpus(&corpus, &pre)?;
    run.set_config(&cfg)?;
    run.write("tokens.jsonl", tokens.to_jsonl().as_bytes())
}

fn cmd_lda(run: &mut Run, tokens: &Path, cfg: &LdaConfig, top_n: usize) -> Result<()> {
    run.input(tokens)?;
    let corpus = TokenizedCorpus::load(tokens)?;
    let docs: Vec<(String, Vec<String>)> = corpus.reviews.into_iter().map(|r| (r.id, r.tokens)).collect();
    let model = fit_lda(&docs, cfg)?;
    run.set_config(&serde_json::json!({ "tokens": tokens, "lda": cfg, "top_n": top_n }))?;
    run.write("lda_model.json", &crate::io::to_json_pretty(&model, "LDA model")?)?;
    run.write("heatmap.csv", model.heatmap_csv().as_bytes())?;
    run.write("top_words.txt", model.top_words_listing(top_n).as_bytes())
}

fn cmd_train(run: &mut Run, tokens: &Path, cfg: &OvrConfig) -> Result<()> {
    run.input(tokens)?;
    let docs = TokenizedCorpus::load(tokens)?.labeled();
    if docs.is_empty() {
        return Err(Error::Empty(format!("{} has no labeled reviews", tokens.display())));
    }
    let model = crate::classify::train_ovr_docs(&docs, cfg)?;
    run.set_config(&serde_json::json!({ "tokens": tokens, "train": cfg }))?;
    let dir = run.path("model");
    model.save(&dir)?;
    run.record("model/manifest.json");
    for c in Category::ALL {
        run.record(&format!("model/member_{}.json", c.index()));
    }
    Ok(())
}

fn cmd_evaluate(run: &mut Run, model_dir: &Path, tokens: &Path) -> Result<()> {
    run.input(&model_dir.join("manifest.json"))?;
    for c in Category::ALL {
        run.input(&model_dir.join(format!("member_{}.json", c.index())))?;
    }
    run.input(tokens)?;
    let model = OvrModel::load(model_dir)?;
    let corpus = TokenizedCorpus::load(tokens)?;
    let labeled: Vec<_> = corpus.reviews.iter().filter(|r| r.label.is_some()).collect();
    if labeled.is_empty() {
        return Err(Error::Empty(format!("{} has no labeled reviews", tokens.display())));
    }
    let docs = corpus.labeled();

    let mut binary = String::from("category,accuracy\n");
    for c in Category::ALL {
        let acc = binary_accuracy(model.member(c), &docs, c)?;
        binary.push_str(&format!("{},{acc:.6}\n", csv_field(c.name())));
    }
    let predicted: Vec<Category> = docs.tokens.iter().map(|t| model.predict(t)).collect();
    let multiclass = accuracy(&predicted, &docs.labels)?;
    let mut predictions = String::from("id,gold,predicted\n");
    for (r, p) in labeled.iter().zip(&predicted) {
        let gold = r.label.expect("filtered to labeled");
        predictions.push_str(&format!(
            "{},{},{}\n",
            csv_field(&r.id),
            csv_field(gold.name()),
            csv_field(p.name())
        ));
    }
    run.set_config(&serde_json::json!({ "model": model_dir, "tokens": tokens }))?;
    run.write("binary_accuracy.csv", binary.as_bytes())?;
    run.write("multiclass_accuracy.csv", format!("accuracy\n{multiclass:.6}\n").as_bytes())?;
    run.write("predictions.csv", predictions.as_bytes())
}

fn cmd_experiment(run: &mut Run, file: &FileConfig, t: &TextArgs, cfg: &ExperimentConfig, cross: bool) -> Result<()> {
    let (text_cfg, pipeline, kbs) = text_setup(run, file, t)?;
    let corpus = Corpus::load(&t.corpus)?;
    if cross {
        let table = cross_series_experiment(&corpus, &kbs, &pipeline, cfg)?;
        run.set_config(&serde_json::json!({ "text": text_cfg, "experiment": cfg }))?;
        run.write("cross_series.csv", table.to_csv().as_bytes())?;
        run.write("cross_series_by_method.csv", table.per_method_csv().as_bytes())?;
        run.write("cross_series_multiclass.csv", table.multiclass_csv().as_bytes())
    } else {
        let cfg = ExperimentConfig {
            surrogate: text_cfg.surrogates,
            ..cfg.clone()
        };
        let table = feature_size_sweep(&corpus, &kbs, &pipeline, &cfg)?;
        run.set_config(&serde_json::json!({ "text": text_cfg, "experiment": cfg }))?;
        run.write("sweep.csv", table.to_csv().as_bytes())
    }
}

fn cmd_synth(run: &mut Run, spec: &SyntheticSpec) -> Result<()> {
    let (corpus, kbs) = generate_synthetic(spec)?;
    run.set_config(&serde_json::json!({
        "seed": spec.seed,
        "series": spec.series.len(),
        "reviews_per_series": spec.reviews_per_series,
        "planted_rate": spec.planted_rate,
        "mention_rates": spec.mention_rates,
    }))?;
    run.write("corpus.jsonl", corpus.to_jsonl().as_bytes())?;
    for kb in &kbs {
        run.write(&format!("kb/{}.json", kb.series), kb.to_json().as_bytes())?;
    }
    run.write("spec.json", &crate::io::to_json_pretty(spec, "synthetic spec")?)
}
