//! Note-line merging and near-duplicate removal.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::text::word_tokens;

pub const DEFAULT_DEDUP_THRESHOLD: f64 = 0.9;

/// One physical line of a note as exported from the EHR.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawNoteLine {
    pub doc_id: String,
    pub line_no: u64,
    pub patient_id: String,
    pub note_date: String,
    pub text: String,
}

/// A note reassembled from its lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClinicalDocument {
    pub doc_id: String,
    pub patient_id: String,
    pub note_date: String,
    pub text: String,
}

impl ClinicalDocument {
    /// Split back into line records (line numbers from 0).
    pub fn to_lines(&self) -> Vec<RawNoteLine> {
        self.text
            .split('\n')
            .enumerate()
            .map(|(i, t)| RawNoteLine {
                doc_id: self.doc_id.clone(),
                line_no: i as u64,
                patient_id: self.patient_id.clone(),
                note_date: self.note_date.clone(),
                text: t.to_string(),
            })
            .collect()
    }
}

/// A document that could not be merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeIssue {
    pub doc_id: String,
    pub message: String,
}

/// Checks the `YYYY-MM-DD` calendar date form.
pub fn is_iso_date(s: &str) -> bool {
    let b = s.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return false;
    }
    let digits = |r: std::ops::Range<usize>| b[r].iter().all(u8::is_ascii_digit);
    if !(digits(0..4) && digits(5..7) && digits(8..10)) {
        return false;
    }
    let month: u32 = s[5..7].parse().unwrap_or(0);
    let day: u32 = s[8..10].parse().unwrap_or(0);
    (1..=12).contains(&month) && (1..=31).contains(&day)
}

/// Groups lines by `doc_id` and joins each group's text with `\n` in
/// ascending `line_no` order. Metadata comes from the lowest-numbered line.
/// Output is sorted by `doc_id`. Documents whose lines disagree on the
/// patient, or repeat a line number, are skipped and reported.
pub fn merge_note_lines<I>(lines: I) -> (Vec<ClinicalDocument>, Vec<MergeIssue>)
where
    I: IntoIterator<Item = RawNoteLine>,
{
    let mut groups: BTreeMap<String, Vec<RawNoteLine>> = BTreeMap::new();
    for line in lines {
        groups.entry(line.doc_id.clone()).or_default().push(line);
    }

    let mut docs = Vec::with_capacity(groups.len());
    let mut issues = Vec::new();
    for (doc_id, mut group) in groups {
        group.sort_by_key(|l| l.line_no);
        let first = &group[0];
        if let Some(other) = group.iter().find(|l| l.patient_id != first.patient_id) {
            issues.push(MergeIssue {
                doc_id,
                message: format!(
                    "conflicting patient_id {:?} and {:?}",
                    first.patient_id, other.patient_id
                ),
            });
            continue;
        }
        if let Some(w) = group.windows(2).find(|w| w[0].line_no == w[1].line_no) {
            issues.push(MergeIssue {
                doc_id,
                message: format!("duplicate line_no {}", w[0].line_no),
            });
            continue;
        }
        let text = group
            .iter()
            .map(|l| l.text.as_str())
            .collect::<Vec<_>>()
            .join("\n");
        docs.push(ClinicalDocument {
            doc_id,
            patient_id: first.patient_id.clone(),
            note_date: first.note_date.clone(),
            text,
        });
    }
    (docs, issues)
}

/// Raw word-frequency vector of a document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermVector {
    counts: BTreeMap<String, u64>,
}

impl TermVector {
    pub fn from_text(text: &str) -> Self {
        let mut counts = BTreeMap::new();
        for tok in word_tokens(text) {
            *counts.entry(tok).or_insert(0) += 1;
        }
        TermVector { counts }
    }

    pub fn from_counts<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let counts = pairs
            .into_iter()
            .filter(|(_, c)| *c > 0)
            .map(|(t, c)| (t.into(), c))
            .collect();
        TermVector { counts }
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn get(&self, term: &str) -> u64 {
        self.counts.get(term).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    fn norm_sq(&self) -> u128 {
        self.counts.values().map(|&c| (c as u128) * (c as u128)).sum()
    }

    // Merge-join over the two sorted term lists.
    fn dot(&self, other: &TermVector) -> u128 {
        let mut a = self.counts.iter().peekable();
        let mut b = other.counts.iter().peekable();
        let mut acc: u128 = 0;
        while let (Some((ta, ca)), Some((tb, cb))) = (a.peek(), b.peek()) {
            match ta.cmp(tb) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    acc += (**ca as u128) * (**cb as u128);
                    a.next();
                    b.next();
                }
            }
        }
        acc
    }
}

pub fn term_vector(doc: &ClinicalDocument) -> TermVector {
    TermVector::from_text(&doc.text)
}

/// Cosine of two frequency vectors; 0 when either is empty.
///
/// Dot product and norms are exact integers, so the result is identical
/// across platforms and argument order.
pub fn cosine_similarity(a: &TermVector, b: &TermVector) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let dot = a.dot(b) as f64;
    let denom = ((a.norm_sq() as f64) * (b.norm_sq() as f64)).sqrt();
    (dot / denom).clamp(0.0, 1.0)
}

/// A document dropped as a near-duplicate of a kept one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovedPair {
    pub removed_id: String,
    pub kept_id: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, Default)]
pub struct DedupOutcome {
    pub kept: Vec<ClinicalDocument>,
    pub removed: Vec<RemovedPair>,
}

impl DedupOutcome {
    /// Removed-pairs report: header plus one `removed_id,kept_id,similarity`
    /// row per pair, similarity to six decimals.
    pub fn removed_csv(&self) -> String {
        let mut out = String::from("removed_id,kept_id,similarity\n");
        for p in &self.removed {
            out.push_str(&format!(
                "{},{},{:.6}\n",
                crate::io::csv_field(&p.removed_id),
                crate::io::csv_field(&p.kept_id),
                p.similarity
            ));
        }
        out
    }
}

/// Reads a removed-pairs report written by [`DedupOutcome::removed_csv`].
pub fn read_removed_csv(path: &std::path::Path) -> crate::Result<Vec<RemovedPair>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| csv_error(path, e)))
        .collect()
}

fn csv_error(path: &std::path::Path, e: csv::Error) -> crate::Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => crate::Error::io(path, io),
        kind => crate::Error::InputFormat {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn fnv1a(bytes: impl IntoIterator<Item = u8>, mut h: u64) -> u64 {
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Seeded coin for a flagged pair: true when the lexicographically larger
/// id is the one to drop. Symmetric in argument order.
fn drop_larger_id(seed: u64, a: &str, b: &str) -> bool {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut h = fnv1a(seed.to_le_bytes(), 0xcbf2_9ce4_8422_2325);
    h = fnv1a(lo.bytes(), h);
    h = fnv1a([0xff], h);
    h = fnv1a(hi.bytes(), h);
    ChaCha8Rng::seed_from_u64(h).gen_bool(0.5)
}

fn dedup_block(
    mut block: Vec<&ClinicalDocument>,
    threshold: f64,
    seed: u64,
) -> (Vec<String>, Vec<RemovedPair>) {
    block.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    let mut kept: Vec<(&ClinicalDocument, TermVector)> = Vec::new();
    let mut removed = Vec::new();

    'candidates: for doc in block {
        let vec = term_vector(doc);
        let mut i = 0;
        while i < kept.len() {
            let sim = cosine_similarity(&kept[i].1, &vec);
            if sim > threshold {
                let other = kept[i].0;
                let drop_candidate = drop_larger_id(seed, &other.doc_id, &doc.doc_id)
                    == (doc.doc_id > other.doc_id);
                if drop_candidate {
                    removed.push(RemovedPair {
                        removed_id: doc.doc_id.clone(),
                        kept_id: other.doc_id.clone(),
                        similarity: sim,
                    });
                    continue 'candidates;
                }
                removed.push(RemovedPair {
                    removed_id: other.doc_id.clone(),
                    kept_id: doc.doc_id.clone(),
                    similarity: sim,
                });
                kept.remove(i);
                continue;
            }
            i += 1;
        }
        kept.push((doc, vec));
    }
    (kept.into_iter().map(|(d, _)| d.doc_id.clone()).collect(), removed)
}

/// Removes near-duplicate documents within each patient.
///
/// Documents of one patient are scanned in `doc_id` order; each is compared
/// against every document kept so far, and any pair with similarity strictly
/// above `threshold` loses one member chosen by a draw keyed on
/// `(seed, pair ids)`. Kept documents come back sorted by `doc_id`, removals
/// sorted by removed id.
pub fn deduplicate(docs: &[ClinicalDocument], threshold: f64, seed: u64) -> DedupOutcome {
    let mut blocks: BTreeMap<&str, Vec<&ClinicalDocument>> = BTreeMap::new();
    for d in docs {
        blocks.entry(d.patient_id.as_str()).or_default().push(d);
    }
    let results: Vec<_> = blocks
        .into_values()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|b| dedup_block(b, threshold, seed))
        .collect();

    let mut keep_ids = HashSet::new();
    let mut removed = Vec::new();
    for (k, r) in results {
        keep_ids.extend(k);
        removed.extend(r);
    }
    let mut kept: Vec<ClinicalDocument> = docs
        .iter()
        .filter(|d| keep_ids.contains(&d.doc_id))
        .cloned()
        .collect();
    kept.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    removed.sort_by(|a, b| a.removed_id.cmp(&b.removed_id));
    DedupOutcome { kept, removed }
}
