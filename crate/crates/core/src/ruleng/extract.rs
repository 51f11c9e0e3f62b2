use std::collections::BTreeMap;

use super::assertion::assertion_in_sentence;
use super::segment::sentence_byte_spans;
use super::{ConceptCategory, Mention, RuleSet};
use crate::corpus::ClinicalDocument;
use crate::text::CharIndex;

/// All rule hits in a document, sentence by sentence, with assertions.
///
/// Each rule contributes its non-overlapping matches. Hits of one concept on
/// an identical span collapse to one mention; for sleep duration the class
/// with the highest precedence (short, long, medium) wins, otherwise the
/// earliest rule. Output is ordered by start offset, then concept.
pub fn extract_mentions(doc: &ClinicalDocument, ruleset: &RuleSet) -> Vec<Mention> {
    let text = doc.text.as_str();
    let idx = CharIndex::new(text);
    let mut mentions = Vec::new();

    for (sentence_index, (s, e)) in sentence_byte_spans(text).into_iter().enumerate() {
        let sentence = &text[s..e];
        // (concept, start, end) -> rule index
        let mut hits: BTreeMap<(ConceptCategory, usize, usize), usize> = BTreeMap::new();
        for ri in ruleset.prefilter.matches(sentence).into_iter() {
            let compiled = &ruleset.rules[ri];
            for m in compiled.regex.find_iter(sentence) {
                if m.start() == m.end() {
                    continue;
                }
                let key = (compiled.rule.concept, m.start(), m.end());
                hits.entry(key)
                    .and_modify(|prev| {
                        if outranks(ruleset, ri, *prev) {
                            *prev = ri;
                        }
                    })
                    .or_insert(ri);
            }
        }
        for ((concept, ms, me), ri) in hits {
            let rule = &ruleset.rules[ri].rule;
            let assertion = assertion_in_sentence(sentence, ms, rule.negation_exempt);
            mentions.push(Mention {
                doc_id: doc.doc_id.clone(),
                concept,
                span: (idx.char_of(s + ms), idx.char_of(s + me)),
                matched_text: sentence[ms..me].to_string(),
                sentence_index,
                assertion,
                duration_class: rule.duration_class,
            });
        }
    }
    mentions.sort_by(|a, b| {
        (a.span.0, a.concept, a.span.1).cmp(&(b.span.0, b.concept, b.span.1))
    });
    mentions
}

fn outranks(ruleset: &RuleSet, candidate: usize, current: usize) -> bool {
    let a = &ruleset.rules[candidate].rule;
    let b = &ruleset.rules[current].rule;
    match (a.duration_class, b.duration_class) {
        (Some(x), Some(y)) if x != y => x.precedence() < y.precedence(),
        _ => candidate < current,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{compile_rules, Assertion, DurationClass, Rule};
    use super::*;
    use crate::text::char_slice;

    fn doc(text: &str) -> ClinicalDocument {
        ClinicalDocument {
            doc_id: "d".into(),
            patient_id: "p".into(),
            note_date: "2020-01-01".into(),
            text: text.into(),
        }
    }

    fn concepts(text: &str) -> Vec<(ConceptCategory, Assertion)> {
        extract_mentions(&doc(text), &RuleSet::default())
            .into_iter()
            .map(|m| (m.concept, m.assertion))
            .collect()
    }

    #[test]
    fn snoring_positive() {
        let ms = extract_mentions(&doc("Patient reports snoring at night."), &RuleSet::default());
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].concept, ConceptCategory::Snoring);
        assert_eq!(ms[0].assertion, Assertion::Positive);
        assert_eq!(ms[0].matched_text, "snoring");
        assert_eq!(ms[0].span, (16, 23));
    }

    #[test]
    fn osa_is_snoring_and_sleep_problem() {
        let c = concepts("OSA on BiPAP");
        assert!(c.contains(&(ConceptCategory::Snoring, Assertion::Positive)));
        assert!(c.contains(&(ConceptCategory::SleepProblem, Assertion::Positive)));
        assert!(concepts("dosage reviewed").is_empty());
    }

    #[test]
    fn duration_long() {
        let ms = extract_mentions(&doc("She will sleep more than 12 hours"), &RuleSet::default());
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].duration_class, Some(DurationClass::Long));
    }

    #[test]
    fn duration_precedence_on_shared_span() {
        let ms = extract_mentions(&doc("sleeps 6-6 hours"), &RuleSet::default());
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].duration_class, Some(DurationClass::Short));
        let ms = extract_mentions(&doc("sleeps 8-8 hours"), &RuleSet::default());
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].duration_class, Some(DurationClass::Long));
        let ms = extract_mentions(&doc("sleeps 7-8 hours"), &RuleSet::default());
        assert_eq!(ms[0].duration_class, Some(DurationClass::Medium));
    }

    #[test]
    fn spans_are_char_offsets() {
        let text = "Résumé noted. Naps daily";
        let ms = extract_mentions(&doc(text), &RuleSet::default());
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].sentence_index, 1);
        assert_eq!(char_slice(text, ms[0].span.0, ms[0].span.1), "Naps");
    }

    #[test]
    fn identical_spans_collapse() {
        let rules = vec![
            Rule {
                concept: ConceptCategory::Napping,
                pattern: r"\bnap\b".into(),
                duration_class: None,
                negation_exempt: false,
            },
            Rule {
                concept: ConceptCategory::Napping,
                pattern: r"\bnap(s)?\b".into(),
                duration_class: None,
                negation_exempt: true,
            },
        ];
        let set = compile_rules(rules).unwrap();
        let ms = extract_mentions(&doc("No nap"), &set);
        assert_eq!(ms.len(), 1);
        // first rule wins, so negation applies
        assert_eq!(ms[0].assertion, Assertion::Negated);
    }

    #[test]
    fn empty_ruleset_extracts_nothing() {
        let set = compile_rules(Vec::new()).unwrap();
        assert!(extract_mentions(&doc("snoring"), &set).is_empty());
    }

    #[test]
    fn ordered_by_start_then_concept() {
        let ms = extract_mentions(&doc("Insomnia and snoring. OSA."), &RuleSet::default());
        let starts: Vec<_> = ms.iter().map(|m| (m.span.0, m.concept)).collect();
        let mut sorted = starts.clone();
        sorted.sort();
        assert_eq!(starts, sorted);
    }
}
