//! Tokenization and offset helpers shared by every stage.

/// Lowercased word tokens: maximal runs of alphanumeric characters.
pub fn word_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Word tokens with their byte ranges in `text`.
pub fn word_token_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            spans.push((s, i));
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// Maps byte offsets of one string to character offsets and back.
///
/// ASCII text (the common case) needs no table.
#[derive(Debug, Clone)]
pub struct CharIndex {
    // byte offset of every char boundary, plus text.len(); empty for ASCII
    boundaries: Vec<usize>,
    len: usize,
}

impl CharIndex {
    pub fn new(text: &str) -> Self {
        if text.is_ascii() {
            return CharIndex {
                boundaries: Vec::new(),
                len: text.len(),
            };
        }
        let mut boundaries: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
        boundaries.push(text.len());
        CharIndex {
            boundaries,
            len: text.len(),
        }
    }

    /// Character offset of a byte offset that lies on a char boundary.
    pub fn char_of(&self, byte: usize) -> usize {
        if self.boundaries.is_empty() {
            return byte;
        }
        match self.boundaries.binary_search(&byte) {
            Ok(i) => i,
            Err(i) => i,
        }
    }

    /// Byte offset of a character offset (clamped to the text end).
    pub fn byte_of(&self, ch: usize) -> usize {
        if self.boundaries.is_empty() {
            return ch.min(self.len);
        }
        self.boundaries
            .get(ch)
            .copied()
            .unwrap_or(self.len)
    }
}

/// Slice `text` by a character range.
pub fn char_slice(text: &str, start: usize, end: usize) -> &str {
    let idx = CharIndex::new(text);
    &text[idx.byte_of(start)..idx.byte_of(end)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_split_on_punctuation() {
        let t: Vec<_> = word_tokens("Snoring, SNORING! don't").collect();
        assert_eq!(t, ["snoring", "snoring", "don", "t"]);
    }

    #[test]
    fn char_index_non_ascii() {
        let s = "é nap";
        let idx = CharIndex::new(s);
        assert_eq!(idx.char_of(3), 2);
        assert_eq!(idx.byte_of(2), 3);
        assert_eq!(char_slice(s, 2, 5), "nap");
    }

    #[test]
    fn token_spans_cover_words() {
        let s = "a bb, ccc";
        let spans = word_token_spans(s);
        assert_eq!(spans, vec![(0, 1), (2, 4), (6, 9)]);
    }
}
