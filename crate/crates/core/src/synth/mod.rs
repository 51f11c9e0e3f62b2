//! Deterministic synthetic note corpora with known labels.

mod templates;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use templates::{PlantTemplate, KEYWORD_DISTRACTORS, PLANTS};

use crate::corpus::{cosine_similarity, term_vector, ClinicalDocument, TermVector, DEFAULT_DEDUP_THRESHOLD};
use crate::error::{Error, Result};
use crate::eval::{GoldRecord, Split};
use crate::io::{write_jsonl, write_text};
use crate::retrieval::{is_relevant, KeywordLexicon};
use crate::ruleng::{aggregate, extract_mentions, Assertion, ConceptCategory, DocumentLabels, DurationClass, RuleSet};

/// Documents planted with each assertion for one yes/no concept.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleCounts {
    pub positive: usize,
    pub negated: usize,
    pub hypothetical: usize,
}

impl RoleCounts {
    pub fn total(&self) -> usize {
        self.positive + self.negated + self.hypothetical
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DurationCounts {
    pub short: usize,
    pub medium: usize,
    pub long: usize,
}

impl DurationCounts {
    pub fn total(&self) -> usize {
        self.short + self.medium + self.long
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_docs: usize,
    pub seed: u64,
    pub concepts: BTreeMap<ConceptCategory, RoleCounts>,
    pub duration: DurationCounts,
    pub duplicate_pair_count: usize,
    pub distractor_keyword_rate: f64,
    pub docs_per_patient: usize,
    pub test_fraction: f64,
    pub filler_sentences: (usize, usize),
}

impl Default for SynthConfig {
    fn default() -> Self {
        use ConceptCategory::*;
        let rc = |positive, negated, hypothetical| RoleCounts {
            positive,
            negated,
            hypothetical,
        };
        let concepts = [
            (Snoring, rc(44, 20, 8)),
            (Napping, rc(5, 5, 3)),
            (SleepProblem, rc(55, 25, 10)),
            (BadSleepQuality, rc(28, 14, 6)),
            (DaytimeSleepiness, rc(10, 6, 3)),
            (NightWakings, rc(4, 4, 2)),
        ]
        .into_iter()
        .collect();
        SynthConfig {
            n_docs: 320,
            seed: 42,
            concepts,
            duration: DurationCounts {
                short: 0,
                medium: 1,
                long: 2,
            },
            duplicate_pair_count: 10,
            distractor_keyword_rate: 0.6,
            docs_per_patient: 8,
            test_fraction: 0.375,
            filler_sentences: (9, 15),
        }
    }
}

impl SynthConfig {
    /// Config with no planted mentions at all.
    pub fn blank(n_docs: usize, seed: u64) -> Self {
        SynthConfig {
            n_docs,
            seed,
            concepts: BTreeMap::new(),
            duration: DurationCounts::default(),
            duplicate_pair_count: 0,
            distractor_keyword_rate: 0.0,
            ..SynthConfig::default()
        }
    }

    /// The default proportions stretched to `n_docs`.
    pub fn scaled(n_docs: usize, seed: u64) -> Self {
        let base = SynthConfig::default();
        let f = n_docs as f64 / base.n_docs as f64;
        let sc = |x: usize| (x as f64 * f).round() as usize;
        SynthConfig {
            n_docs,
            seed,
            concepts: base
                .concepts
                .iter()
                .map(|(c, r)| {
                    (
                        *c,
                        RoleCounts {
                            positive: sc(r.positive),
                            negated: sc(r.negated),
                            hypothetical: sc(r.hypothetical),
                        },
                    )
                })
                .collect(),
            duration: DurationCounts {
                short: sc(base.duration.short),
                medium: sc(base.duration.medium),
                long: sc(base.duration.long),
            },
            duplicate_pair_count: sc(base.duplicate_pair_count),
            ..base
        }
    }

    pub fn counts(&self, concept: ConceptCategory) -> RoleCounts {
        self.concepts.get(&concept).copied().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_docs == 0 {
            return bad("n_docs must be positive".into());
        }
        for (c, r) in &self.concepts {
            if !c.is_binary() {
                return bad(format!("{} takes duration counts, not role counts", c.key()));
            }
            if r.total() > self.n_docs {
                return bad(format!(
                    "{}: {} planted documents exceed n_docs {}",
                    c.key(),
                    r.total(),
                    self.n_docs
                ));
            }
        }
        if self.duration.total() > self.n_docs {
            return bad(format!(
                "sleep_duration: {} planted documents exceed n_docs {}",
                self.duration.total(),
                self.n_docs
            ));
        }
        if self.duplicate_pair_count > self.n_docs {
            return bad(format!(
                "duplicate_pair_count {} exceeds n_docs {}",
                self.duplicate_pair_count, self.n_docs
            ));
        }
        if !(0.0..=1.0).contains(&self.distractor_keyword_rate) {
            return bad("distractor_keyword_rate must lie in [0, 1]".into());
        }
        if !(0.0..=1.0).contains(&self.test_fraction) {
            return bad("test_fraction must lie in [0, 1]".into());
        }
        if self.docs_per_patient == 0 {
            return bad("docs_per_patient must be positive".into());
        }
        let (lo, hi) = self.filler_sentences;
        if lo < 4 || hi < lo {
            return bad("filler_sentences needs 4 <= min <= max".into());
        }
        Ok(())
    }
}

/// One planted mention as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plant {
    pub doc_id: String,
    pub concept: ConceptCategory,
    pub assertion: Assertion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_class: Option<DurationClass>,
    pub planted_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicatePair {
    pub original_id: String,
    pub duplicate_id: String,
}

#[derive(Debug, Clone)]
pub struct SynthBundle {
    pub documents: Vec<ClinicalDocument>,
    /// Labels for original documents only; duplicates carry none.
    pub gold: Vec<GoldRecord>,
    pub plants: Vec<Plant>,
    pub duplicate_pairs: Vec<DuplicatePair>,
    /// Originals that contain at least one retrieval keyword.
    pub keyword_docs: BTreeSet<String>,
}

impl SynthBundle {
    /// Writes `notes.jsonl` (one record per note line), `gold.jsonl`,
    /// `plants.jsonl`, `duplicates.jsonl` and `keyword_docs.txt`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut out = |name: &str| {
            let p = dir.join(name);
            written.push(p.clone());
            p
        };
        let lines: Vec<_> = self.documents.iter().flat_map(|d| d.to_lines()).collect();
        write_jsonl(&out("notes.jsonl"), &lines)?;
        write_jsonl(&out("gold.jsonl"), &self.gold)?;
        write_jsonl(&out("plants.jsonl"), &self.plants)?;
        write_jsonl(&out("duplicates.jsonl"), &self.duplicate_pairs)?;
        let mut kw = String::new();
        for id in &self.keyword_docs {
            kw.push_str(id);
            kw.push('\n');
        }
        write_text(&out("keyword_docs.txt"), &kw)?;
        Ok(written)
    }
}

/// Substitutes `{slot}` placeholders.
fn fill(template: &str, rng: &mut ChaCha8Rng) -> String {
    use templates::*;
    let mut out = String::with_capacity(template.len() + 32);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = open + rest[open..].find('}').expect("unclosed slot");
        let slot = &rest[open + 1..close];
        let pick = |pool: &[&str], rng: &mut ChaCha8Rng| pool.choose(rng).unwrap().to_string();
        let v = match slot {
            "pt" => pick(&SUBJECTS, rng),
            "fam" => pick(&RELATIVES, rng),
            "reason" => pick(REASONS, rng),
            "med" => pick(MEDS, rng),
            "freq" => pick(FREQS, rng),
            "task" => pick(TASKS, rng),
            "lab" => pick(LABS, rng),
            "topic" => pick(TOPICS, rng),
            "unit" => pick(UNITS, rng),
            "finding" => pick(FINDINGS, rng),
            "trend" => pick(TRENDS, rng),
            "plan" => pick(PLANS, rng),
            "device" => pick(DEVICES, rng),
            "specialty" => pick(SPECIALTIES, rng),
            "bp" => format!("{}/{}", rng.gen_range(100..170), rng.gen_range(55..100)),
            "hr" => rng.gen_range(52..110).to_string(),
            "dose" => (rng.gen_range(1..50) * 5).to_string(),
            "value" => format!("{}.{}", rng.gen_range(1..140), rng.gen_range(0..10)),
            "n" => rng.gen_range(2..13).to_string(),
            "w" => rng.gen_range(95..260).to_string(),
            "mmse" => rng.gen_range(8..30).to_string(),
            other => panic!("unknown slot {other}"),
        };
        out.push_str(&v);
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    out
}

fn single_doc(text: &str) -> ClinicalDocument {
    ClinicalDocument {
        doc_id: "probe".into(),
        patient_id: "probe".into(),
        note_date: "2000-01-01".into(),
        text: text.into(),
    }
}

/// What the rules find in a sentence: (concept, assertion, duration).
fn observed(text: &str, rules: &RuleSet) -> BTreeSet<(ConceptCategory, u8, Option<DurationClass>)> {
    extract_mentions(&single_doc(text), rules)
        .into_iter()
        .map(|m| (m.concept, assertion_code(m.assertion), m.duration_class))
        .collect()
}

fn assertion_code(a: Assertion) -> u8 {
    match a {
        Assertion::Positive => 0,
        Assertion::Negated => 1,
        Assertion::Hypothetical => 2,
    }
}

fn declared_set(t: &PlantTemplate) -> BTreeSet<(ConceptCategory, u8, Option<DurationClass>)> {
    t.declared()
        .into_iter()
        .map(|(c, a)| {
            let d = if c == t.concept { t.duration } else { None };
            (c, assertion_code(a), d)
        })
        .collect()
}

/// Checks one rendered plant sentence against its declaration.
pub fn check_plant(t: &PlantTemplate, sentence: &str, rules: &RuleSet) -> Result<()> {
    let got = observed(sentence, rules);
    let want = declared_set(t);
    if got != want {
        return Err(Error::Invariant(format!(
            "template {:?} rendered as {sentence:?}: rules found {got:?}, declared {want:?}",
            t.text
        )));
    }
    Ok(())
}

/// Renders every template under every subject and relative and checks each
/// against its declaration.
pub fn validate_templates(rules: &RuleSet) -> Result<()> {
    for t in PLANTS {
        for pt in templates::SUBJECTS {
            for fam in templates::RELATIVES {
                let s = t.text.replace("{pt}", pt).replace("{fam}", fam);
                check_plant(t, &s, rules)?;
            }
        }
    }
    let lex = KeywordLexicon::default();
    for (s, kw) in KEYWORD_DISTRACTORS {
        if !observed(s, rules).is_empty() {
            return Err(Error::Invariant(format!("distractor {s:?} triggers a rule")));
        }
        let hit = is_relevant(&single_doc(s), &lex);
        if !hit.is_some_and(|h| h.matched_keywords.contains(*kw)) {
            return Err(Error::Invariant(format!("distractor {s:?} does not match keyword {kw:?}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Assert(Assertion),
    Duration(DurationClass),
}

fn compatible(t: &PlantTemplate, roles: &BTreeMap<ConceptCategory, Role>) -> bool {
    t.also
        .iter()
        .all(|(c, a)| roles.get(c) == Some(&Role::Assert(*a)))
}

fn pick_docs(order: &mut Vec<usize>, n_docs: usize, rng: &mut ChaCha8Rng) {
    order.clear();
    order.extend(0..n_docs);
    order.shuffle(rng);
}

/// Generates a corpus, gold labels and plant manifest.
///
/// Per concept, disjoint random sets of documents get a positive, negated or
/// hypothetical plant; gold is the vote over those plants. Every plant is
/// checked against the default rules, and the assembled corpus is checked
/// for agreement with extraction, for keyword placement and for accidental
/// near-duplicates within a patient.
pub fn generate(cfg: &SynthConfig) -> Result<SynthBundle> {
    cfg.validate()?;
    let rules = RuleSet::default();
    validate_templates(&rules)?;
    let lex = KeywordLexicon::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_docs;

    // roles
    let mut roles: Vec<BTreeMap<ConceptCategory, Role>> = vec![BTreeMap::new(); n];
    let mut order = Vec::with_capacity(n);
    for concept in ConceptCategory::BINARY {
        let rc = cfg.counts(concept);
        pick_docs(&mut order, n, &mut rng);
        let mut it = order.iter();
        for (a, k) in [
            (Assertion::Positive, rc.positive),
            (Assertion::Negated, rc.negated),
            (Assertion::Hypothetical, rc.hypothetical),
        ] {
            for &d in it.by_ref().take(k) {
                roles[d].insert(concept, Role::Assert(a));
            }
        }
    }
    pick_docs(&mut order, n, &mut rng);
    let mut it = order.iter();
    for (class, k) in [
        (DurationClass::Short, cfg.duration.short),
        (DurationClass::Medium, cfg.duration.medium),
        (DurationClass::Long, cfg.duration.long),
    ] {
        for &d in it.by_ref().take(k) {
            roles[d].insert(ConceptCategory::SleepDuration, Role::Duration(class));
        }
    }

    // keyword distractor placement: planted docs first, then random others
    let planted: Vec<usize> = (0..n).filter(|&d| !roles[d].is_empty()).collect();
    let want_kw = ((cfg.distractor_keyword_rate * n as f64).round() as usize).max(planted.len());
    let mut kw_docs: BTreeSet<usize> = planted.iter().copied().collect();
    pick_docs(&mut order, n, &mut rng);
    for &d in &order {
        if kw_docs.len() >= want_kw {
            break;
        }
        kw_docs.insert(d);
    }

    let n_patients = n.div_ceil(cfg.docs_per_patient).max(1);
    let width = n.to_string().len().max(6);
    let mut documents = Vec::with_capacity(n + cfg.duplicate_pair_count);
    let mut gold = Vec::with_capacity(n);
    let mut plants = Vec::new();
    let mut keyword_docs = BTreeSet::new();

    for d in 0..n {
        let doc_id = format!("note-{d:0width$}");
        let patient_id = format!("pt-{:05}", rng.gen_range(0..n_patients));
        let note_date = format!(
            "{}-{:02}-{:02}",
            rng.gen_range(2016..2021),
            rng.gen_range(1..13),
            rng.gen_range(1..29)
        );

        let mut sentences: Vec<String> = Vec::new();
        let mut doc_plants: Vec<Plant> = Vec::new();
        for (&concept, &role) in &roles[d] {
            let candidates: Vec<&PlantTemplate> = PLANTS
                .iter()
                .filter(|t| {
                    t.concept == concept
                        && match role {
                            Role::Assert(a) => t.assertion == a && t.duration.is_none(),
                            Role::Duration(c) => t.duration == Some(c),
                        }
                        && compatible(t, &roles[d])
                })
                .collect();
            let t = *candidates.choose(&mut rng).ok_or_else(|| {
                Error::Invariant(format!("no template for {} {role:?}", concept.key()))
            })?;
            let s = fill(t.text, &mut rng);
            check_plant(t, &s, &rules)?;
            for (c, a) in t.declared() {
                doc_plants.push(Plant {
                    doc_id: doc_id.clone(),
                    concept: c,
                    assertion: a,
                    duration_class: if c == t.concept { t.duration } else { None },
                    planted_text: s.clone(),
                });
            }
            sentences.push(s);
        }
        if kw_docs.contains(&d) {
            let (s, _) = KEYWORD_DISTRACTORS.choose(&mut rng).unwrap();
            sentences.push(s.to_string());
            keyword_docs.insert(doc_id.clone());
        }
        let n_fill = rng.gen_range(cfg.filler_sentences.0..=cfg.filler_sentences.1);
        for _ in 0..n_fill {
            let f = templates::FILLER.choose(&mut rng).unwrap();
            sentences.push(fill(f, &mut rng));
        }
        sentences.shuffle(&mut rng);

        let mut text = String::new();
        let mut i = 0;
        while i < sentences.len() {
            if i > 0 {
                text.push('\n');
            }
            let take = rng.gen_range(1..=3).min(sentences.len() - i);
            text.push_str(&sentences[i..i + take].join(" "));
            i += take;
        }

        let doc = ClinicalDocument {
            doc_id: doc_id.clone(),
            patient_id,
            note_date,
            text,
        };

        let labels = vote_plants(&doc_id, &doc_plants);
        let extracted = aggregate(&doc_id, &extract_mentions(&doc, &rules));
        if extracted != labels {
            return Err(Error::Invariant(format!(
                "{doc_id}: extraction gives {extracted:?}, plants give {labels:?}"
            )));
        }
        if is_relevant(&doc, &lex).is_some() != kw_docs.contains(&d) {
            return Err(Error::Invariant(format!("{doc_id}: keyword placement leaked")));
        }
        gold.push(GoldRecord {
            split: None,
            labels,
        });
        plants.extend(doc_plants);
        documents.push(doc);
    }

    check_no_accidental_duplicates(&documents)?;
    assign_splits(&mut gold, cfg.test_fraction, &mut rng);

    // signed copies of originals; short notes whose copy would not clear
    // the threshold are passed over
    let mut duplicate_pairs = Vec::with_capacity(cfg.duplicate_pair_count);
    let mut copies = Vec::with_capacity(cfg.duplicate_pair_count);
    pick_docs(&mut order, n, &mut rng);
    for &d in &order {
        if copies.len() == cfg.duplicate_pair_count {
            break;
        }
        let orig = &documents[d];
        let clinician = templates::CLINICIANS.choose(&mut rng).unwrap();
        let dup = ClinicalDocument {
            doc_id: format!("{}-signed", orig.doc_id),
            patient_id: orig.patient_id.clone(),
            note_date: orig.note_date.clone(),
            text: format!(
                "{}\nDigitally signed by {clinician}, MD on {} at {:02}:{:02}",
                orig.text,
                orig.note_date,
                rng.gen_range(7..19),
                rng.gen_range(0..60)
            ),
        };
        if cosine_similarity(&term_vector(orig), &term_vector(&dup)) > DEFAULT_DEDUP_THRESHOLD {
            copies.push(dup);
        }
    }
    if copies.len() < cfg.duplicate_pair_count {
        return Err(Error::Config(format!(
            "only {} documents are long enough to carry a signed copy, {} requested",
            copies.len(),
            cfg.duplicate_pair_count
        )));
    }
    copies.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    for dup in copies {
        duplicate_pairs.push(DuplicatePair {
            original_id: dup.doc_id.trim_end_matches("-signed").to_string(),
            duplicate_id: dup.doc_id.clone(),
        });
        documents.push(dup);
    }
    documents.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));

    Ok(SynthBundle {
        documents,
        gold,
        plants,
        duplicate_pairs,
        keyword_docs,
    })
}

/// Majority vote over plant records, mirroring mention aggregation.
pub fn vote_plants(doc_id: &str, plants: &[Plant]) -> DocumentLabels {
    let mut labels = DocumentLabels::negative(doc_id);
    for concept in ConceptCategory::BINARY {
        let (mut yes, mut no) = (0usize, 0usize);
        for p in plants.iter().filter(|p| p.concept == concept) {
            match p.assertion {
                Assertion::Positive => yes += 1,
                Assertion::Negated => no += 1,
                Assertion::Hypothetical => {}
            }
        }
        labels.set(concept, yes >= 1 && yes >= no);
    }
    labels.sleep_duration = plants
        .iter()
        .find(|p| p.concept == ConceptCategory::SleepDuration && p.assertion == Assertion::Positive)
        .and_then(|p| p.duration_class);
    labels
}

fn check_no_accidental_duplicates(docs: &[ClinicalDocument]) -> Result<()> {
    let mut by_patient: BTreeMap<&str, Vec<(usize, TermVector)>> = BTreeMap::new();
    for (i, d) in docs.iter().enumerate() {
        by_patient.entry(&d.patient_id).or_default().push((i, term_vector(d)));
    }
    for group in by_patient.values() {
        for (a, (i, va)) in group.iter().enumerate() {
            for (j, vb) in &group[a + 1..] {
                let sim = cosine_similarity(va, vb);
                if sim > DEFAULT_DEDUP_THRESHOLD {
                    return Err(Error::Invariant(format!(
                        "{} and {} collide at cosine {sim:.4}",
                        docs[*i].doc_id, docs[*j].doc_id
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Stratified train/test assignment. Rarest concepts are placed first so
/// that any concept with two or more positives has at least one on each side.
fn assign_splits(gold: &mut [GoldRecord], test_fraction: f64, rng: &mut ChaCha8Rng) {
    let n = gold.len();
    let n_test = (n as f64 * test_fraction).round() as usize;
    let mut split: Vec<Option<Split>> = vec![None; n];

    let mut concepts: Vec<(usize, ConceptCategory)> = ConceptCategory::BINARY
        .iter()
        .map(|&c| (gold.iter().filter(|g| g.labels.get(c)).count(), c))
        .collect();
    concepts.sort();
    for (count, concept) in concepts {
        if count == 0 {
            continue;
        }
        let mut target = (count as f64 * test_fraction).round() as usize;
        if count >= 2 {
            target = target.clamp(1, count - 1);
        }
        let mut pos: Vec<usize> = (0..n).filter(|&i| gold[i].labels.get(concept)).collect();
        pos.shuffle(rng);
        let mut in_test = pos.iter().filter(|&&i| split[i] == Some(Split::Test)).count();
        for &i in &pos {
            if split[i].is_none() {
                if in_test < target {
                    split[i] = Some(Split::Test);
                    in_test += 1;
                } else {
                    split[i] = Some(Split::Train);
                }
            }
        }
    }

    let mut rest: Vec<usize> = (0..n).filter(|&i| split[i].is_none()).collect();
    rest.shuffle(rng);
    let mut test_now = split.iter().filter(|s| **s == Some(Split::Test)).count();
    for i in rest {
        if test_now < n_test {
            split[i] = Some(Split::Test);
            test_now += 1;
        } else {
            split[i] = Some(Split::Train);
        }
    }
    for (g, s) in gold.iter_mut().zip(split) {
        g.split = s;
    }
}
