use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::retrieval::stem;

pub const STOPWORD_LIST_VERSION: &str = "english-basic-1";

/// Common English function words.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "me", "more", "most", "my", "myself", "now", "of", "off", "on", "once", "only", "or",
    "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she", "should", "so",
    "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up",
    "very", "was", "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why",
    "will", "with", "would", "you", "your", "yours", "yourself", "yourselves",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenPipelineConfig {
    pub stopword_version: String,
    pub stopwords: BTreeSet<String>,
    pub stemming: bool,
}

impl Default for TokenPipelineConfig {
    fn default() -> Self {
        TokenPipelineConfig {
            stopword_version: STOPWORD_LIST_VERSION.to_string(),
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            stemming: true,
        }
    }
}

/// Lowercase, split on non-alphanumerics, drop stopwords, stem.
///
/// Numbers survive; only tokens without any letter or digit are dropped,
/// which the alphanumeric split already guarantees.
pub fn preprocess(text: &str, cfg: &TokenPipelineConfig) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter(|t| !cfg.stopwords.contains(*t))
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .map(|t| if cfg.stemming { stem(t) } else { t.to_string() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pipeline_example() {
        let cfg = TokenPipelineConfig {
            stopwords: ["the", "is"].iter().map(|s| s.to_string()).collect(),
            ..TokenPipelineConfig::default()
        };
        assert_eq!(preprocess("The patient IS snoring.", &cfg), ["patient", "snor"]);
        assert!(preprocess("", &cfg).is_empty());
    }

    #[test]
    fn numbers_are_kept() {
        let cfg = TokenPipelineConfig::default();
        assert_eq!(preprocess("sleeps 4-5 hours", &cfg), ["sleep", "4", "5", "hour"]);
    }

    #[test]
    fn stemming_can_be_disabled() {
        let cfg = TokenPipelineConfig {
            stemming: false,
            ..TokenPipelineConfig::default()
        };
        assert_eq!(preprocess("Napping daily", &cfg), ["napping", "daily"]);
    }

    #[test]
    fn deterministic_on_random_strings() {
        let cfg = TokenPipelineConfig::default();
        let alphabet: Vec<char> = "abcdefgXYZ 019.,;-'éß\n".chars().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut digest = 0u64;
        for _ in 0..1000 {
            let len = rng.gen_range(0..40);
            let s: String = (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
            let a = preprocess(&s, &cfg);
            assert_eq!(a, preprocess(&s, &cfg));
            for t in &a {
                assert!(!t.is_empty());
                digest = digest.wrapping_mul(31).wrapping_add(t.len() as u64);
            }
        }
        assert_ne!(digest, 0);
    }
}
