use super::{Assertion, Mention};
use crate::text::CharIndex;

/// Number of word tokens before a mention searched for a negation cue.
pub const NEGATION_WINDOW: usize = 6;

pub const NEGATION_CUES: [&str; 8] = [
    "no",
    "not",
    "denies",
    "denied",
    "denying",
    "without",
    "negative for",
    "never",
];

pub const HYPOTHETICAL_CUES: [&str; 9] = [
    "if",
    "take",
    "recommend",
    "recommended",
    "advised",
    "consider",
    "screen",
    "monitor for",
    "risk of",
];

/// Tokens that close a negation scope.
pub const SCOPE_TERMINATORS: [&str; 2] = ["but", ";"];

#[derive(Debug, PartialEq)]
enum Tok {
    Word(String),
    Semicolon,
}

fn prefix_tokens(prefix: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in prefix.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
            continue;
        }
        if !cur.is_empty() {
            out.push(Tok::Word(std::mem::take(&mut cur)));
        }
        if c == ';' {
            out.push(Tok::Semicolon);
        }
    }
    if !cur.is_empty() {
        out.push(Tok::Word(cur));
    }
    out
}

fn is_terminator(t: &Tok) -> bool {
    match t {
        Tok::Semicolon => SCOPE_TERMINATORS.contains(&";"),
        Tok::Word(w) => SCOPE_TERMINATORS.contains(&w.as_str()),
    }
}

/// Start positions (in `words`) where `cue` occurs as consecutive words.
fn cue_positions<'a>(words: &'a [(usize, &str)], cue: &'a str) -> impl Iterator<Item = (usize, usize)> + 'a {
    let parts: Vec<&str> = cue.split(' ').collect();
    let n = parts.len();
    (0..words.len().saturating_sub(n - 1)).filter_map(move |i| {
        let hit = parts.iter().enumerate().all(|(k, p)| words[i + k].1 == *p);
        // (token index of first word, token index of last word)
        hit.then(|| (words[i].0, words[i + n - 1].0))
    })
}

/// Assertion of a mention starting at byte `mention_start` of `sentence`.
///
/// Negated when a negation cue lies entirely within the last
/// [`NEGATION_WINDOW`] words before the mention with no scope terminator
/// after it, unless the rule is negation-exempt. Otherwise hypothetical when
/// a hypothetical cue appears anywhere earlier in the sentence.
pub fn assertion_in_sentence(sentence: &str, mention_start: usize, negation_exempt: bool) -> Assertion {
    let toks = prefix_tokens(&sentence[..mention_start]);
    let words: Vec<(usize, &str)> = toks
        .iter()
        .enumerate()
        .filter_map(|(i, t)| match t {
            Tok::Word(w) => Some((i, w.as_str())),
            Tok::Semicolon => None,
        })
        .collect();

    if !negation_exempt {
        let window = &words[words.len().saturating_sub(NEGATION_WINDOW)..];
        let last_cue_end = NEGATION_CUES
            .iter()
            .flat_map(|cue| cue_positions(window, cue))
            .map(|(_, end)| end)
            .max();
        if let Some(end) = last_cue_end {
            if !toks[end + 1..].iter().any(is_terminator) {
                return Assertion::Negated;
            }
        }
    }

    if HYPOTHETICAL_CUES
        .iter()
        .any(|cue| cue_positions(&words, cue).next().is_some())
    {
        return Assertion::Hypothetical;
    }
    Assertion::Positive
}

/// Assertion for a mention given the document text and the character span
/// of its sentence.
pub fn assert_mention(
    mention: &Mention,
    text: &str,
    sentence_span: (usize, usize),
    negation_exempt: bool,
) -> Assertion {
    let idx = CharIndex::new(text);
    let (s, e) = (idx.byte_of(sentence_span.0), idx.byte_of(sentence_span.1));
    let start = idx.byte_of(mention.span.0);
    debug_assert!(s <= start && start <= e);
    assertion_in_sentence(&text[s..e], start - s, negation_exempt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(sentence: &str, needle: &str) -> Assertion {
        let pos = sentence.find(needle).expect("needle");
        assertion_in_sentence(sentence, pos, false)
    }

    #[test]
    fn negation_cue_in_window() {
        assert_eq!(at("Patient denies snoring.", "snoring"), Assertion::Negated);
        assert_eq!(at("No naps.", "naps"), Assertion::Negated);
        assert_eq!(at("Negative for insomnia", "insomnia"), Assertion::Negated);
    }

    #[test]
    fn negation_window_is_six_words() {
        assert_eq!(at("no a b c d e insomnia", "insomnia"), Assertion::Negated);
        assert_eq!(at("no a b c d e f insomnia", "insomnia"), Assertion::Positive);
        // a two-word cue must fit entirely inside the window
        assert_eq!(at("negative for a b c d insomnia", "insomnia"), Assertion::Negated);
        assert_eq!(at("negative for a b c d e insomnia", "insomnia"), Assertion::Positive);
    }

    #[test]
    fn terminators_close_scope() {
        assert_eq!(at("No wheezing but snoring noted", "snoring"), Assertion::Positive);
        assert_eq!(at("No cough; snoring noted", "snoring"), Assertion::Positive);
        assert_eq!(at("Cough but no snoring", "snoring"), Assertion::Negated);
    }

    #[test]
    fn cues_match_whole_words_only() {
        assert_eq!(at("Nothing about snoring", "snoring"), Assertion::Positive);
        assert_eq!(at("Notable snoring", "snoring"), Assertion::Positive);
        assert_eq!(at("Screening showed insomnia", "insomnia"), Assertion::Positive);
    }

    #[test]
    fn hypothetical_cues() {
        let s = "Take Melatonin 5 mg at bedtime every night for 3-4 weeks for difficulty falling asleep";
        assert_eq!(at(s, "difficulty"), Assertion::Hypothetical);
        assert_eq!(at("Call if snoring worsens", "snoring"), Assertion::Hypothetical);
        assert_eq!(at("Increased risk of sleep apnea", "sleep apnea"), Assertion::Hypothetical);
        assert_eq!(
            at("Depression screen done 7/2017, PHQ9 score 16 points for sleep problem", "sleep problem"),
            Assertion::Hypothetical
        );
        // after the mention does not count
        assert_eq!(at("Snoring, consider sleep study", "Snoring"), Assertion::Positive);
    }

    #[test]
    fn negation_wins_over_hypothetical() {
        assert_eq!(at("If no snoring", "snoring"), Assertion::Negated);
    }

    #[test]
    fn exempt_rules_skip_negation() {
        let s = "Patient is not sleeping well";
        let pos = s.find("not sleeping").unwrap();
        assert_eq!(assertion_in_sentence(s, pos, true), Assertion::Positive);
        let s = "Denies not sleeping";
        let pos = s.find("not sleeping").unwrap();
        assert_eq!(assertion_in_sentence(s, pos, true), Assertion::Positive);
        assert_eq!(assertion_in_sentence(s, pos, false), Assertion::Negated);
    }
}
