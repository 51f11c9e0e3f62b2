//! End-to-end run: merge, dedup, retrieve, extract, vote, evaluate.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{deduplicate, merge_note_lines, ClinicalDocument, DedupOutcome, MergeIssue, RawNoteLine,
    RemovedPair};
use crate::error::{Error, Result};
use crate::eval::{evaluate_labels, render_csv, render_report, split_gold, GoldRecord, SystemReport};
use crate::io::{write_jsonl, write_text};
use crate::mlbase::{train_models, MlConfig, TokenPipelineConfig};
use crate::retrieval::{retrieve, KeywordLexicon, RetrievalHit};
use crate::ruleng::{aggregate, extract_mentions, DocumentLabels, Mention, RuleSet};

pub const RULE_SYSTEM: &str = "Rule-based NLP";
pub const LOGREG_SYSTEM: &str = "LR";
pub const KNN_SYSTEM: &str = "KNN";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineSettings {
    pub dedup_threshold: f64,
    pub dedup_seed: u64,
    pub split_seed: u64,
    /// Reassign every gold record with this train fraction. When absent,
    /// explicit splits in the gold file are used.
    pub train_fraction: Option<f64>,
    /// Train and score the TF-IDF baselines.
    pub ml_enabled: bool,
    pub ml: MlConfig,
    pub tokens: TokenPipelineConfig,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings {
            dedup_threshold: crate::corpus::DEFAULT_DEDUP_THRESHOLD,
            dedup_seed: 0,
            split_seed: 0,
            train_fraction: None,
            ml_enabled: false,
            ml: MlConfig::default(),
            tokens: TokenPipelineConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub n_train: usize,
    pub n_test: usize,
    pub reports: Vec<SystemReport>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub merged: Vec<ClinicalDocument>,
    pub merge_issues: Vec<MergeIssue>,
    pub dedup: DedupOutcome,
    pub retrieved: Vec<RetrievalHit>,
    pub mentions: Vec<Mention>,
    /// One record per merged document, sorted by `doc_id`.
    pub labels: Vec<DocumentLabels>,
    pub evaluation: Option<Evaluation>,
}

/// Rule labels for every kept document; documents outside the retrieved set
/// are all-no.
pub fn label_documents(
    kept: &[ClinicalDocument],
    retrieved: &[RetrievalHit],
    rules: &RuleSet,
) -> (Vec<Mention>, Vec<DocumentLabels>) {
    let hit: BTreeSet<&str> = retrieved.iter().map(|h| h.doc_id.as_str()).collect();
    let per_doc: Vec<(Vec<Mention>, DocumentLabels)> = kept
        .par_iter()
        .map(|d| {
            if !hit.contains(d.doc_id.as_str()) {
                return (Vec::new(), DocumentLabels::negative(d.doc_id.clone()));
            }
            let m = extract_mentions(d, rules);
            let l = aggregate(&d.doc_id, &m);
            (m, l)
        })
        .collect();
    let mut mentions = Vec::new();
    let mut labels = Vec::with_capacity(per_doc.len());
    for (m, l) in per_doc {
        mentions.extend(m);
        labels.push(l);
    }
    (mentions, labels)
}

/// Extends kept-document labels to removed duplicates, which take the labels
/// of the document that finally survived in their place. Output is sorted by
/// `doc_id`.
pub fn inherit_labels(labels: &mut Vec<DocumentLabels>, removed: &[RemovedPair]) -> Result<()> {
    let kept_for: BTreeMap<&str, &str> = removed
        .iter()
        .map(|p| (p.removed_id.as_str(), p.kept_id.as_str()))
        .collect();
    let by_id: BTreeMap<String, DocumentLabels> =
        labels.iter().map(|l| (l.doc_id.clone(), l.clone())).collect();
    for removed in kept_for.keys() {
        let mut cur = *removed;
        let mut hops = 0;
        while let Some(next) = kept_for.get(cur) {
            cur = next;
            hops += 1;
            if hops > kept_for.len() {
                return Err(Error::Invariant(format!("dedup chain from {removed} does not end")));
            }
        }
        let src = by_id
            .get(cur)
            .ok_or_else(|| Error::Invariant(format!("{removed} maps to unknown kept document {cur}")))?;
        let mut l = src.clone();
        l.doc_id = removed.to_string();
        labels.push(l);
    }
    labels.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    Ok(())
}

fn evaluate(
    merged: &[ClinicalDocument],
    labels: &[DocumentLabels],
    gold: Vec<GoldRecord>,
    settings: &PipelineSettings,
) -> Result<Evaluation> {
    let (train, test) = split_gold(gold, settings.train_fraction, settings.split_seed)?;
    let by_id: BTreeMap<&str, &DocumentLabels> = labels.iter().map(|l| (l.doc_id.as_str(), l)).collect();
    let unknown: Vec<String> = train
        .iter()
        .chain(&test)
        .filter(|g| !by_id.contains_key(g.doc_id()))
        .map(|g| g.doc_id().to_string())
        .collect();
    if !unknown.is_empty() {
        return Err(Error::KeyMismatch {
            missing_in_predictions: unknown,
            missing_in_gold: Vec::new(),
        });
    }
    let test_gold: Vec<DocumentLabels> = test.iter().map(|g| g.labels.clone()).collect();
    let rule_preds: Vec<DocumentLabels> = test
        .iter()
        .filter_map(|g| by_id.get(g.doc_id()).map(|l| (*l).clone()))
        .collect();
    let mut reports = vec![evaluate_labels(RULE_SYSTEM, &rule_preds, &test_gold)?];
    let mut warnings = Vec::new();

    if settings.ml_enabled {
        let text: BTreeMap<&str, &str> = merged.iter().map(|d| (d.doc_id.as_str(), d.text.as_str())).collect();
        let train_set: Vec<(&str, &DocumentLabels)> =
            train.iter().map(|g| (text[g.doc_id()], &g.labels)).collect();
        let model = train_models(&train_set, &settings.tokens, settings.ml)?;
        warnings.extend(model.warnings());
        let preds: Vec<_> = test
            .par_iter()
            .map(|g| model.predict(g.doc_id(), text[g.doc_id()]))
            .collect();
        let lr: Vec<DocumentLabels> = preds.iter().map(|p| p.logreg.clone()).collect();
        let knn: Vec<DocumentLabels> = preds.into_iter().map(|p| p.knn).collect();
        reports.push(evaluate_labels(LOGREG_SYSTEM, &lr, &test_gold)?);
        reports.push(evaluate_labels(KNN_SYSTEM, &knn, &test_gold)?);
    }

    Ok(Evaluation {
        n_train: train.len(),
        n_test: test.len(),
        reports,
        warnings,
    })
}

/// Runs every stage in memory.
pub fn run_pipeline(
    lines: Vec<RawNoteLine>,
    lexicon: &KeywordLexicon,
    rules: &RuleSet,
    gold: Option<Vec<GoldRecord>>,
    settings: &PipelineSettings,
) -> Result<PipelineRun> {
    if !(0.0..=1.0).contains(&settings.dedup_threshold) {
        return Err(Error::Config(format!(
            "dedup threshold {} outside [0, 1]",
            settings.dedup_threshold
        )));
    }
    let (merged, merge_issues) = merge_note_lines(lines);
    let dedup = deduplicate(&merged, settings.dedup_threshold, settings.dedup_seed);
    let retrieved = retrieve(&dedup.kept, lexicon);
    let (mentions, mut labels) = label_documents(&dedup.kept, &retrieved, rules);
    inherit_labels(&mut labels, &dedup.removed)?;
    if labels.len() != merged.len() {
        return Err(Error::Invariant(format!(
            "{} labels for {} merged documents",
            labels.len(),
            merged.len()
        )));
    }
    let evaluation = gold
        .map(|g| evaluate(&merged, &labels, g, settings))
        .transpose()?;
    Ok(PipelineRun {
        merged,
        merge_issues,
        dedup,
        retrieved,
        mentions,
        labels,
        evaluation,
    })
}

impl PipelineRun {
    /// Writes every stage's output into `dir` and returns the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut out = |name: &str| {
            let p = dir.join(name);
            written.push(p.clone());
            p
        };
        write_jsonl(&out("merged.jsonl"), &self.merged)?;
        write_jsonl(&out("kept.jsonl"), &self.dedup.kept)?;
        write_text(&out("removed.csv"), &self.dedup.removed_csv())?;
        write_jsonl(&out("retrieved.jsonl"), &self.retrieved)?;
        write_jsonl(&out("mentions.jsonl"), &self.mentions)?;
        write_jsonl(&out("labels.jsonl"), &self.labels)?;
        if let Some(ev) = &self.evaluation {
            write_text(&out("report.txt"), &render_report(&ev.reports))?;
            write_text(&out("report.csv"), &render_csv(&ev.reports))?;
        }
        Ok(written)
    }

    pub fn counts(&self) -> BTreeMap<&'static str, usize> {
        let mut c = BTreeMap::new();
        c.insert("merged", self.merged.len());
        c.insert("merge_issues", self.merge_issues.len());
        c.insert("kept", self.dedup.kept.len());
        c.insert("removed", self.dedup.removed.len());
        c.insert("retrieved", self.retrieved.len());
        c.insert("mentions", self.mentions.len());
        if let Some(ev) = &self.evaluation {
            c.insert("gold_train", ev.n_train);
            c.insert("gold_test", ev.n_test);
        }
        c
    }
}
