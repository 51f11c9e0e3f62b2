use std::path::Path;

use regex::{Regex, RegexBuilder, RegexSet, RegexSetBuilder};
use serde::{Deserialize, Serialize};

use super::{ConceptCategory, DurationClass};
use crate::error::{Error, Result};

/// One concept pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub concept: ConceptCategory,
    pub pattern: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_class: Option<DurationClass>,
    #[serde(default)]
    pub negation_exempt: bool,
}

impl Rule {
    fn new(concept: ConceptCategory, pattern: &str) -> Self {
        Rule {
            concept,
            pattern: pattern.to_string(),
            duration_class: None,
            negation_exempt: false,
        }
    }

    fn exempt(mut self) -> Self {
        self.negation_exempt = true;
        self
    }

    fn duration(class: DurationClass, pattern: &str) -> Self {
        Rule {
            concept: ConceptCategory::SleepDuration,
            pattern: pattern.to_string(),
            duration_class: Some(class),
            negation_exempt: false,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledRule {
    pub rule: Rule,
    pub regex: Regex,
}

/// Compiled, immutable rules. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct RuleSet {
    pub(crate) rules: Vec<CompiledRule>,
    pub(crate) prefilter: RegexSet,
}

impl RuleSet {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().map(|r| &r.rule)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        compile_rules(parse_rule_file(path)?)
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        compile_rules(default_rules()).expect("default rules compile")
    }
}

const HOURS_LONG: &str = "(8|9|10|11|12|13|14|15|16|17|18|19|20)";

/// The built-in concept rules.
///
/// Word-boundary anchors keep short patterns such as `nap` and `osa` from
/// firing inside other words. The snoring stem pattern is only anchored on
/// the left so it also covers "snored" and "snorer".
pub fn default_rules() -> Vec<Rule> {
    use ConceptCategory::*;
    use DurationClass::*;

    let mut rules = vec![
        Rule::new(Snoring, r"\bsnor(es|ing|e)?"),
        Rule::new(Snoring, r"\bsnorings\b"),
        Rule::new(Snoring, r"\bsleep apnea\b"),
        Rule::new(Snoring, r"\bosa\b"),
        Rule::new(Snoring, r"\bobstructive sleep apnea\b"),
        Rule::new(Napping, r"\bnap(s|ping)?\b"),
        Rule::new(Napping, r"\bdoz(e|es|ed|ing)\b"),
        Rule::new(SleepProblem, r"\binsomnia\b"),
        Rule::new(SleepProblem, r"\bsleeplessness\b"),
        Rule::new(SleepProblem, r"\bsleep (disorders?|problems?)\b"),
        Rule::new(SleepProblem, r"\bhypersomnia\b"),
        Rule::new(SleepProblem, r"\bparasomnia\b"),
        Rule::new(SleepProblem, r"\bosa\b"),
        Rule::new(SleepProblem, r"\bobstructive sleep apnea\b"),
        Rule::new(SleepProblem, r"\bsleep apnea\b"),
        Rule::new(SleepProblem, r"\bhypersomnolence\b"),
        Rule::new(BadSleepQuality, r"\bstaying up\b"),
        Rule::new(
            BadSleepQuality,
            r"\b(trouble|irritable|tense) (\S+\s+){0,5}(sleep(ing)?|asleep)\b",
        ),
        Rule::new(BadSleepQuality, r"\bsleep(s|ing)? poorly\b"),
        Rule::new(BadSleepQuality, r"\bsleep is poor\b"),
        Rule::new(BadSleepQuality, r"\brestless sleep\b"),
        Rule::new(BadSleepQuality, r"\b(ca(n['’]t|nnot)|could(n['’]t| not)) sleep\b").exempt(),
        Rule::new(BadSleepQuality, r"\bsleep issues?\b"),
        Rule::new(
            BadSleepQuality,
            r"\bsleep(ing)? (\S+\s+){0,5}(problems?|problematic)\b",
        ),
        Rule::new(BadSleepQuality, r"\bsleeps? a lot\b"),
        Rule::new(
            BadSleepQuality,
            r"\bdifficulty (\S+\s+){0,5}(asleep|sleep(ing)?)\b",
        ),
        Rule::new(BadSleepQuality, r"\bsleep disturbance\b"),
        Rule::new(BadSleepQuality, r"\bdisturbance in sleep\b"),
        Rule::new(BadSleepQuality, r"\bsleep quality: (fair|bad)\b"),
        Rule::new(BadSleepQuality, r"\bnot sleeping\b").exempt(),
        Rule::new(BadSleepQuality, r"\bno sleep\b").exempt(),
        Rule::new(BadSleepQuality, r"\bsleeplessness\b").exempt(),
        Rule::new(BadSleepQuality, r"\bsleep difficulty\b"),
        Rule::new(BadSleepQuality, r"\bnocturnal agitation\b"),
        Rule::new(BadSleepQuality, r"\bup (during|at) night\b"),
        Rule::new(BadSleepQuality, r"\bnocturnal\b"),
        Rule::new(BadSleepQuality, r"\boften awake\b"),
        Rule::new(
            DaytimeSleepiness,
            r"\b(excessive\s+)?daytime sleep(iness|inesses)?\b",
        ),
        Rule::new(DaytimeSleepiness, r"\b(excessive\s+)?daytime somnolence\b"),
        Rule::new(DaytimeSleepiness, r"\bsleep(s|ing|iness)? at times\b"),
        Rule::new(
            DaytimeSleepiness,
            r"\bsleep(s|iness)? in (\S+\s+){0,2}day(time)?\b",
        ),
        Rule::new(
            DaytimeSleepiness,
            r"\bsleep(s|iness)? during (\S+\s+){0,2}day(time)?\b",
        ),
        Rule::new(DaytimeSleepiness, r"\bsleep all day\b"),
        Rule::new(
            DaytimeSleepiness,
            r"\bsleeps? a lot (through ?out|during|in) (\S+\s+){0,2}day(time)?\b",
        ),
        Rule::new(NightWakings, r"\bnight (wakings?|awakenings?)\b"),
        Rule::new(NightWakings, r"\bwak(e|es|ing up) (\S+\s+){0,5}night\b"),
        Rule::new(
            NightWakings,
            r"\bawake(ning|n)? (from|during|at) night(mares)?\b",
        ),
        Rule::new(
            NightWakings,
            r"\bwak(e|es|ing) up (\S+\s+){0,3}(middle|[0-9]+(-[0-9]+)? times)\b",
        ),
        Rule::duration(
            Short,
            r"\bsleep(s|ing)? (less than|up to) (1|2|3|4|5|6) hours\b",
        ),
        Rule::duration(Short, r"\bsleep(s|ing)?\s+(\S+\s+){0,5}[1-6]-[1-6]\s+hours\b"),
    ];
    rules.push(Rule::duration(
        Long,
        &format!(r"\bsleep(s|ing)? (\S+\s+){{0,5}}more than {HOURS_LONG} hours\b"),
    ));
    rules.push(Rule::duration(
        Long,
        &format!(r"\bsleep(s|ing)? (\S+\s+){{0,5}}(8|9|10|11|12)-{HOURS_LONG} hours\b"),
    ));
    rules.push(Rule::duration(
        Medium,
        r"\bsleep(s|ing)? (\S+\s+){0,5}(6|7|8)-(6|7|8) hours\b",
    ));
    rules
}

// Backreferences and lookaround are outside the supported dialect.
fn dialect_violation(pattern: &str) -> Option<&'static str> {
    for la in ["(?=", "(?!", "(?<=", "(?<!"] {
        if pattern.contains(la) {
            return Some("lookaround is not supported");
        }
    }
    let bytes = pattern.as_bytes();
    let mut i = 0;
    while i + 1 < bytes.len() {
        if bytes[i] == b'\\' {
            if bytes[i + 1].is_ascii_digit() || bytes[i + 1] == b'k' {
                return Some("backreferences are not supported");
            }
            i += 2;
            continue;
        }
        i += 1;
    }
    None
}

/// Validates and compiles rules. Errors name the failing rule by index.
pub fn compile_rules(rules: Vec<Rule>) -> Result<RuleSet> {
    let mut compiled = Vec::with_capacity(rules.len());
    for (index, rule) in rules.into_iter().enumerate() {
        let fail = |message: String| Error::RuleCompile {
            index,
            concept: rule.concept.to_string(),
            message,
        };
        let is_duration = rule.concept == ConceptCategory::SleepDuration;
        if is_duration != rule.duration_class.is_some() {
            return Err(fail(
                "duration_class must be set exactly for sleep_duration rules".into(),
            ));
        }
        if rule.pattern.is_empty() {
            return Err(fail("empty pattern".into()));
        }
        if let Some(why) = dialect_violation(&rule.pattern) {
            return Err(fail(format!("{why}: {:?}", rule.pattern)));
        }
        let regex = RegexBuilder::new(&rule.pattern)
            .case_insensitive(true)
            .build()
            .map_err(|e| fail(e.to_string()))?;
        if regex.is_match("") {
            return Err(fail(format!("pattern matches the empty string: {:?}", rule.pattern)));
        }
        compiled.push(CompiledRule { rule, regex });
    }
    let prefilter = RegexSetBuilder::new(compiled.iter().map(|c| c.rule.pattern.as_str()))
        .case_insensitive(true)
        .build()
        .map_err(|e| Error::Invariant(format!("rule set build failed: {e}")))?;
    Ok(RuleSet {
        rules: compiled,
        prefilter,
    })
}

/// Reads a rule file: one JSON object per line with `concept`, `pattern`,
/// optional `duration_class` and `negation_exempt`.
pub fn parse_rule_file(path: &Path) -> Result<Vec<Rule>> {
    crate::io::read_jsonl(path)
}
