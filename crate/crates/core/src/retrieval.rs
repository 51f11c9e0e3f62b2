//! Keyword retrieval of sleep-relevant documents.
//!
//! A document is relevant when one of its word tokens shares a stem with a
//! lexicon keyword. Matching is whole-token only, so `rem` never fires on
//! "remarkable".

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::ClinicalDocument;
use crate::error::{Error, Result};
use crate::text::word_tokens;

/// Default retrieval keywords, in lexicon order.
pub const DEFAULT_KEYWORDS: [&str; 27] = [
    "snore",
    "snoring",
    "wheeze",
    "wheezing",
    "sleep",
    "sleepiness",
    "sleeping",
    "sleepless",
    "sleeplessness",
    "apnea",
    "hypopnea",
    "osa",
    "insomnia",
    "nap",
    "napping",
    "narcolepsy",
    "nocturnal",
    "somnolence",
    "somnolent",
    "dizziness",
    "hypersomnia",
    "rem",
    "nrem",
    "wake",
    "wakefulness",
    "waking",
    "polysomnography",
];

const SUFFIXES: [&str; 5] = ["ness", "ing", "es", "ed", "s"];
const MIN_STEM: usize = 3;

/// Light suffix-stripping stemmer.
///
/// Strips the longest of `ness`, `ing`, `es`, `ed`, `s` that leaves at least
/// three characters; after `ing`/`ed` a doubled final consonant is collapsed
/// (`napping` -> `nap`). When no suffix applies, a trailing `e` is dropped
/// under the same length bound so `snore` and `snored` meet at `snor`.
pub fn stem(token: &str) -> String {
    let n = token.chars().count();
    for suf in SUFFIXES {
        if let Some(rest) = token.strip_suffix(suf) {
            if n - suf.len() < MIN_STEM {
                continue;
            }
            let mut out = rest.to_string();
            if suf == "ing" || suf == "ed" {
                let cs: Vec<char> = out.chars().collect();
                let k = cs.len();
                if k >= 2
                    && cs[k - 1] == cs[k - 2]
                    && cs[k - 1].is_ascii_alphabetic()
                    && !"aeiou".contains(cs[k - 1])
                    && k - 1 >= MIN_STEM
                {
                    out.pop();
                }
            }
            return out;
        }
    }
    if let Some(rest) = token.strip_suffix('e') {
        if n - 1 >= MIN_STEM {
            return rest.to_string();
        }
    }
    token.to_string()
}

/// Keywords plus their stemmed token sequences.
#[derive(Debug, Clone)]
pub struct KeywordLexicon {
    keywords: Vec<String>,
    stems: Vec<Vec<String>>,
}

impl KeywordLexicon {
    pub fn new<I, S>(keywords: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = BTreeSet::new();
        let mut kws = Vec::new();
        for k in keywords {
            let k = k.as_ref().trim().to_lowercase();
            if k.is_empty() || !seen.insert(k.clone()) {
                continue;
            }
            kws.push(k);
        }
        if kws.is_empty() {
            return Err(Error::Config("keyword lexicon is empty".into()));
        }
        let stems = kws
            .iter()
            .map(|k| word_tokens(k).map(|t| stem(&t)).collect::<Vec<_>>())
            .collect();
        Ok(KeywordLexicon {
            keywords: kws,
            stems,
        })
    }

    /// Parses a lexicon file: one keyword per line, `#` starts a comment.
    pub fn parse(src: &str) -> Result<Self> {
        Self::new(
            src.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty()),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src)
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn stems(&self) -> &[Vec<String>] {
        &self.stems
    }
}

impl Default for KeywordLexicon {
    fn default() -> Self {
        Self::new(DEFAULT_KEYWORDS).expect("default lexicon is non-empty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalHit {
    pub doc_id: String,
    pub matched_keywords: BTreeSet<String>,
    pub token_count: usize,
}

pub fn is_relevant(doc: &ClinicalDocument, lex: &KeywordLexicon) -> Option<RetrievalHit> {
    let stems: Vec<String> = word_tokens(&doc.text).map(|t| stem(&t)).collect();
    let mut matched = BTreeSet::new();
    for (kw, seq) in lex.keywords.iter().zip(&lex.stems) {
        if seq.is_empty() || seq.len() > stems.len() {
            continue;
        }
        if stems.windows(seq.len()).any(|w| w == seq.as_slice()) {
            matched.insert(kw.clone());
        }
    }
    if matched.is_empty() {
        return None;
    }
    Some(RetrievalHit {
        doc_id: doc.doc_id.clone(),
        matched_keywords: matched,
        token_count: stems.len(),
    })
}

/// Hits in corpus order.
pub fn retrieve(corpus: &[ClinicalDocument], lex: &KeywordLexicon) -> Vec<RetrievalHit> {
    use rayon::prelude::*;
    corpus
        .par_iter()
        .filter_map(|d| is_relevant(d, lex))
        .collect()
}
