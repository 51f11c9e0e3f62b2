//! Rule-based sleep concept extraction.
//!
//! Concept rules are regular expressions matched case-insensitively per
//! sentence. Each hit becomes a [`Mention`] with an [`Assertion`] from a
//! small cue-based negation/hypothetical detector, and mentions are reduced
//! to one [`DocumentLabels`] per note by majority vote.

mod assertion;
mod extract;
mod rules;
mod segment;
mod vote;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use assertion::{
    assert_mention, assertion_in_sentence, HYPOTHETICAL_CUES, NEGATION_CUES, NEGATION_WINDOW,
    SCOPE_TERMINATORS,
};
pub use extract::extract_mentions;
pub use rules::{compile_rules, default_rules, parse_rule_file, Rule, RuleSet};
pub use segment::segment_sentences;
pub use vote::aggregate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConceptCategory {
    Snoring,
    Napping,
    SleepProblem,
    BadSleepQuality,
    DaytimeSleepiness,
    NightWakings,
    SleepDuration,
}

impl ConceptCategory {
    pub const ALL: [ConceptCategory; 7] = [
        ConceptCategory::Snoring,
        ConceptCategory::Napping,
        ConceptCategory::SleepProblem,
        ConceptCategory::BadSleepQuality,
        ConceptCategory::DaytimeSleepiness,
        ConceptCategory::NightWakings,
        ConceptCategory::SleepDuration,
    ];

    /// The six yes/no concepts.
    pub const BINARY: [ConceptCategory; 6] = [
        ConceptCategory::Snoring,
        ConceptCategory::Napping,
        ConceptCategory::SleepProblem,
        ConceptCategory::BadSleepQuality,
        ConceptCategory::DaytimeSleepiness,
        ConceptCategory::NightWakings,
    ];

    pub fn is_binary(self) -> bool {
        self != ConceptCategory::SleepDuration
    }

    pub fn key(self) -> &'static str {
        match self {
            ConceptCategory::Snoring => "snoring",
            ConceptCategory::Napping => "napping",
            ConceptCategory::SleepProblem => "sleep_problem",
            ConceptCategory::BadSleepQuality => "bad_sleep_quality",
            ConceptCategory::DaytimeSleepiness => "daytime_sleepiness",
            ConceptCategory::NightWakings => "night_wakings",
            ConceptCategory::SleepDuration => "sleep_duration",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ConceptCategory::Snoring => "Snoring",
            ConceptCategory::Napping => "Napping",
            ConceptCategory::SleepProblem => "Sleep Problem",
            ConceptCategory::BadSleepQuality => "Bad Sleep Quality",
            ConceptCategory::DaytimeSleepiness => "Daytime Sleepiness",
            ConceptCategory::NightWakings => "Night Wakings",
            ConceptCategory::SleepDuration => "Sleep Duration",
        }
    }
}

impl fmt::Display for ConceptCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ConceptCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConceptCategory::ALL
            .into_iter()
            .find(|c| c.key() == s)
            .ok_or_else(|| format!("unknown concept {s:?}"))
    }
}

/// Nightly sleep duration band: short up to 6h, medium 6 to 8h, long 8h+.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DurationClass {
    Short,
    Medium,
    Long,
}

impl DurationClass {
    pub const ALL: [DurationClass; 3] = [DurationClass::Short, DurationClass::Medium, DurationClass::Long];

    /// Resolution order when several duration rules match the same span.
    pub(crate) fn precedence(self) -> u8 {
        match self {
            DurationClass::Short => 0,
            DurationClass::Long => 1,
            DurationClass::Medium => 2,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            DurationClass::Short => "short",
            DurationClass::Medium => "medium",
            DurationClass::Long => "long",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assertion {
    Positive,
    Negated,
    Hypothetical,
}

/// A single rule hit. `span` is a half-open character range into the
/// document text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub doc_id: String,
    pub concept: ConceptCategory,
    pub span: (usize, usize),
    pub matched_text: String,
    pub sentence_index: usize,
    pub assertion: Assertion,
    pub duration_class: Option<DurationClass>,
}

/// Document-level labels; the same shape is used for gold and predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentLabels {
    pub doc_id: String,
    pub snoring: bool,
    pub napping: bool,
    pub sleep_problem: bool,
    pub bad_sleep_quality: bool,
    pub daytime_sleepiness: bool,
    pub night_wakings: bool,
    pub sleep_duration: Option<DurationClass>,
}

impl DocumentLabels {
    pub fn negative(doc_id: impl Into<String>) -> Self {
        DocumentLabels {
            doc_id: doc_id.into(),
            snoring: false,
            napping: false,
            sleep_problem: false,
            bad_sleep_quality: false,
            daytime_sleepiness: false,
            night_wakings: false,
            sleep_duration: None,
        }
    }

    /// Binary label for a yes/no concept; for sleep duration, whether a
    /// class is present.
    pub fn get(&self, concept: ConceptCategory) -> bool {
        match concept {
            ConceptCategory::Snoring => self.snoring,
            ConceptCategory::Napping => self.napping,
            ConceptCategory::SleepProblem => self.sleep_problem,
            ConceptCategory::BadSleepQuality => self.bad_sleep_quality,
            ConceptCategory::DaytimeSleepiness => self.daytime_sleepiness,
            ConceptCategory::NightWakings => self.night_wakings,
            ConceptCategory::SleepDuration => self.sleep_duration.is_some(),
        }
    }

    /// Sets a yes/no concept. Ignored for sleep duration.
    pub fn set(&mut self, concept: ConceptCategory, value: bool) {
        match concept {
            ConceptCategory::Snoring => self.snoring = value,
            ConceptCategory::Napping => self.napping = value,
            ConceptCategory::SleepProblem => self.sleep_problem = value,
            ConceptCategory::BadSleepQuality => self.bad_sleep_quality = value,
            ConceptCategory::DaytimeSleepiness => self.daytime_sleepiness = value,
            ConceptCategory::NightWakings => self.night_wakings = value,
            ConceptCategory::SleepDuration => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concept_keys_round_trip() {
        for c in ConceptCategory::ALL {
            assert_eq!(c.key().parse::<ConceptCategory>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.key()));
        }
        assert_eq!(ConceptCategory::BINARY.len(), 6);
        assert!(!ConceptCategory::SleepDuration.is_binary());
    }

    #[test]
    fn labels_json_shape() {
        let mut l = DocumentLabels::negative("d1");
        l.sleep_duration = Some(DurationClass::Long);
        let v: serde_json::Value = serde_json::to_value(&l).unwrap();
        assert_eq!(v["sleep_duration"], "long");
        assert_eq!(v["night_wakings"], false);
        let none = serde_json::to_value(DocumentLabels::negative("d2")).unwrap();
        assert!(none["sleep_duration"].is_null());
    }
}
