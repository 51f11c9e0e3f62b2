//! Gold standard handling and evaluation.

mod kappa;
mod metrics;
mod report;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use kappa::{cohens_kappa, Kappa};
pub use metrics::{confusion, metrics, ConfusionMatrix, Metrics};
pub use report::{format_metric, render_csv, render_report};

use crate::error::{Error, Result};
use crate::ruleng::{ConceptCategory, DocumentLabels};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// One annotated document. Serialized flat: `doc_id`, `split`, then the
/// label fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    #[serde(flatten)]
    pub labels: DocumentLabels,
}

impl GoldRecord {
    pub fn doc_id(&self) -> &str {
        &self.labels.doc_id
    }
}

fn shuffle_split(mut records: Vec<GoldRecord>, fraction: f64, seed: u64) -> (Vec<GoldRecord>, Vec<GoldRecord>) {
    records.sort_by(|a, b| a.doc_id().cmp(b.doc_id()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    records.shuffle(&mut rng);
    let n_train = (records.len() as f64 * fraction).round() as usize;
    let test = records.split_off(n_train.min(records.len()));
    (records, test)
}

/// Splits gold records into train and test.
///
/// With a fraction, every record is reassigned by a seeded shuffle and
/// `round(n * fraction)` go to train. Without one, records that already
/// carry a split keep it and the rest are split at the default fraction.
/// Both halves come back sorted by `doc_id` with `split` filled in.
pub fn split_gold(
    records: Vec<GoldRecord>,
    train_fraction: Option<f64>,
    seed: u64,
) -> Result<(Vec<GoldRecord>, Vec<GoldRecord>)> {
    let mut seen = std::collections::HashSet::new();
    for r in &records {
        if !seen.insert(r.doc_id().to_string()) {
            return Err(Error::Config(format!("duplicate gold doc_id {:?}", r.doc_id())));
        }
    }
    let (mut train, mut test) = match train_fraction {
        Some(f) => {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config(format!("train fraction {f} not in (0, 1)")));
            }
            shuffle_split(records, f, seed)
        }
        None => {
            let (assigned, unassigned): (Vec<_>, Vec<_>) =
                records.into_iter().partition(|r| r.split.is_some());
            let (mut train, mut test): (Vec<_>, Vec<_>) =
                assigned.into_iter().partition(|r| r.split == Some(Split::Train));
            let (tr, te) = shuffle_split(unassigned, DEFAULT_TRAIN_FRACTION, seed);
            train.extend(tr);
            test.extend(te);
            (train, test)
        }
    };
    for r in &mut train {
        r.split = Some(Split::Train);
    }
    for r in &mut test {
        r.split = Some(Split::Test);
    }
    train.sort_by(|a, b| a.doc_id().cmp(b.doc_id()));
    test.sort_by(|a, b| a.doc_id().cmp(b.doc_id()));
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptReport {
    pub concept: ConceptCategory,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

/// Metrics of one system over every yes/no concept.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemReport {
    pub system: String,
    pub concepts: Vec<ConceptReport>,
}

impl SystemReport {
    pub fn concept(&self, c: ConceptCategory) -> Option<&ConceptReport> {
        self.concepts.iter().find(|r| r.concept == c)
    }
}

/// Scores predicted document labels against gold for the six yes/no
/// concepts. Both sides must cover the same documents.
pub fn evaluate_labels(
    system: &str,
    predictions: &[DocumentLabels],
    gold: &[DocumentLabels],
) -> Result<SystemReport> {
    let concepts = ConceptCategory::BINARY
        .iter()
        .map(|&concept| {
            let p: BTreeMap<String, bool> = predictions
                .iter()
                .map(|l| (l.doc_id.clone(), l.get(concept)))
                .collect();
            let g: BTreeMap<String, bool> =
                gold.iter().map(|l| (l.doc_id.clone(), l.get(concept))).collect();
            let cm = confusion(&p, &g)?;
            Ok(ConceptReport {
                concept,
                confusion: cm,
                metrics: metrics(&cm),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SystemReport {
        system: system.to_string(),
        concepts,
    })
}
