//! Config file sections and the per-run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::classify::Method;
use crate::error::{Error, Result};
use crate::feature_select::Selector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SegmenterKind {
    /// Longest match against a dictionary, one character otherwise.
    Dict,
    /// Split on whitespace.
    Whitespace,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub segmenter: Option<SegmenterKind>,
    pub surrogates: Option<bool>,
    pub stopwords: Option<PathBuf>,
    pub dict: Option<PathBuf>,
    pub kb_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaSection {
    pub topics: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub iterations: Option<usize>,
    pub top_n: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub method: Option<Method>,
    pub selector: Option<Selector>,
    pub budgets: Option<Vec<usize>>,
    pub smoothing: Option<f64>,
    pub lr_eta: Option<f64>,
    pub lr_lambda: Option<f64>,
    pub lr_epochs: Option<usize>,
    pub svm_c: Option<f64>,
    pub svm_epochs: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub methods: Option<Vec<Method>>,
    pub sweep_method: Option<Method>,
    pub sizes: Option<Vec<usize>>,
    pub per_series_limit: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub series: Option<usize>,
    pub reviews: Option<usize>,
    pub mention_rate: Option<f64>,
    pub planted_rate: Option<f64>,
}

/// Everything a `--config` file may set; each value yields to its flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub preprocess: PreprocessSection,
    pub lda: LdaSection,
    pub model: ModelSection,
    pub experiment: ExperimentSection,
    pub synth: SynthSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        serde_json::from_str(&crate::io::read_to_string(path)?)
            .map_err(|e| Error::json(format!("config file {}", path.display()), e))
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    tool_version: &'a str,
    seed: u64,
    config: &'a serde_json::Value,
    inputs: &'a BTreeMap<String, String>,
    outputs: &'a [String],
    timestamp: String,
}

/// Collects input digests and written outputs, then records them in `run_manifest.json`.
pub struct Run {
    command: &'static str,
    out_dir: PathBuf,
    seed: u64,
    config: serde_json::Value,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

pub const MANIFEST_FILE: &str = "run_manifest.json";

impl Run {
    pub fn new(command: &'static str, out_dir: &Path, seed: u64) -> Self {
        Run {
            command,
            out_dir: out_dir.to_path_buf(),
            seed,
            config: serde_json::Value::Null,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn set_config<T: Serialize>(&mut self, config: &T) -> Result<()> {
        self.config = serde_json::to_value(config).map_err(|e| Error::json("effective config", e))?;
        Ok(())
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let digest = crate::io::file_digest(path)?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.out_dir.join(rel)
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        crate::io::write_atomic(&self.path(rel), bytes)?;
        self.record(rel);
        Ok(())
    }

    /// Notes an output written by other means.
    pub fn record(&mut self, rel: &str) {
        self.outputs.push(rel.to_string());
    }

    pub fn finish(mut self) -> Result<()> {
        self.outputs.sort();
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
            .to_string();
        let manifest = Manifest {
            command: self.command,
            tool_version: env!("CARGO_PKG_VERSION"),
            seed: self.seed,
            config: &self.config,
            inputs: &self.inputs,
            outputs: &self.outputs,
            timestamp,
        };
        crate::io::write_atomic(&self.path(MANIFEST_FILE), &crate::io::to_json_pretty(&manifest, "run manifest")?)
    }
}
