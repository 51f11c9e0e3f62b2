use std::collections::BTreeMap;

use super::{Assertion, ConceptCategory, DocumentLabels, DurationClass, Mention};

/// Majority vote over mentions.
///
/// Positive mentions vote yes, negated vote no, hypothetical abstain. A
/// concept is labeled yes when it has at least one yes vote and no fewer yes
/// than no votes. Sleep duration takes the most frequent class among positive
/// duration mentions, ties going to the class mentioned first.
pub fn aggregate(doc_id: &str, mentions: &[Mention]) -> DocumentLabels {
    let mut labels = DocumentLabels::negative(doc_id);

    for concept in ConceptCategory::BINARY {
        let (mut yes, mut no) = (0usize, 0usize);
        for m in mentions.iter().filter(|m| m.concept == concept) {
            match m.assertion {
                Assertion::Positive => yes += 1,
                Assertion::Negated => no += 1,
                Assertion::Hypothetical => {}
            }
        }
        labels.set(concept, yes >= 1 && yes >= no);
    }

    let mut durations: Vec<&Mention> = mentions
        .iter()
        .filter(|m| {
            m.concept == ConceptCategory::SleepDuration
                && m.assertion == Assertion::Positive
                && m.duration_class.is_some()
        })
        .collect();
    durations.sort_by_key(|m| (m.span.0, m.span.1));
    let mut counts: BTreeMap<DurationClass, usize> = BTreeMap::new();
    for m in &durations {
        *counts.entry(m.duration_class.unwrap()).or_default() += 1;
    }
    if let Some(&best) = counts.values().max() {
        labels.sleep_duration = durations
            .iter()
            .filter_map(|m| m.duration_class)
            .find(|c| counts[c] == best);
    }
    labels
}
