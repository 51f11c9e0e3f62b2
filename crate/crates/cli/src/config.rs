//! Pipeline configuration file.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;
use sleepnote::mlbase::{LogisticHyperparams, MlConfig, TokenPipelineConfig, DEFAULT_K};
use sleepnote::pipeline::PipelineSettings;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineFile {
    pub paths: Paths,
    #[serde(default)]
    pub dedup: DedupSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub ml: MlSection,
    pub workers: Option<usize>,
}

/// Relative paths are taken from the config file's directory.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus: PathBuf,
    pub lexicon: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DedupSection {
    pub threshold: f64,
    pub seed: u64,
}

impl Default for DedupSection {
    fn default() -> Self {
        DedupSection {
            threshold: sleepnote::corpus::DEFAULT_DEDUP_THRESHOLD,
            seed: 0,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSection {
    pub seed: u64,
    pub train_fraction: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlSection {
    pub enabled: bool,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_lambda: f64,
    pub threshold: f64,
    pub k: usize,
    pub l2_normalize: bool,
    pub stemming: bool,
}

impl Default for MlSection {
    fn default() -> Self {
        let hp = LogisticHyperparams::default();
        let ml = MlConfig::default();
        MlSection {
            enabled: false,
            learning_rate: hp.learning_rate,
            epochs: hp.epochs,
            l2_lambda: hp.l2_lambda,
            threshold: hp.threshold,
            k: DEFAULT_K,
            l2_normalize: ml.l2_normalize,
            stemming: TokenPipelineConfig::default().stemming,
        }
    }
}

impl PipelineFile {
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: PipelineFile =
            toml::from_str(&src).map_err(|e| ConfigSyntax(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let abs = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        abs(&mut cfg.paths.corpus);
        abs(&mut cfg.paths.output_dir);
        for p in [&mut cfg.paths.lexicon, &mut cfg.paths.rules, &mut cfg.paths.gold]
            .into_iter()
            .flatten()
        {
            abs(p);
        }
        Ok(cfg)
    }

    /// Input files that do not exist.
    pub fn missing_inputs(&self) -> Vec<PathBuf> {
        std::iter::once(&self.paths.corpus)
            .chain(&self.paths.lexicon)
            .chain(&self.paths.rules)
            .chain(&self.paths.gold)
            .filter(|p| !p.is_file())
            .cloned()
            .collect()
    }

    pub fn settings(&self) -> PipelineSettings {
        let m = &self.ml;
        PipelineSettings {
            dedup_threshold: self.dedup.threshold,
            dedup_seed: self.dedup.seed,
            split_seed: self.split.seed,
            train_fraction: self.split.train_fraction,
            ml_enabled: m.enabled,
            ml: MlConfig {
                logreg: LogisticHyperparams {
                    learning_rate: m.learning_rate,
                    epochs: m.epochs,
                    l2_lambda: m.l2_lambda,
                    threshold: m.threshold,
                },
                knn_k: m.k,
                l2_normalize: m.l2_normalize,
            },
            tokens: TokenPipelineConfig {
                stemming: m.stemming,
                ..TokenPipelineConfig::default()
            },
        }
    }
}

/// Malformed config text.
#[derive(Debug)]
pub struct ConfigSyntax(pub String);

impl std::fmt::Display for ConfigSyntax {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigSyntax {}

/// Config text written next to a synthetic bundle.
pub fn synth_pipeline_toml(seed: u64) -> String {
    format!(
        "[paths]\n\
         corpus = \"notes.jsonl\"\n\
         gold = \"gold.jsonl\"\n\
         output_dir = \"run\"\n\
         \n\
         [dedup]\n\
         threshold = 0.9\n\
         seed = {seed}\n\
         \n\
         [split]\n\
         seed = {seed}\n\
         \n\
         [ml]\n\
         enabled = true\n"
    )
}
