use crate::text::CharIndex;

/// Byte ranges of sentences. A sentence ends at `.`, `?` or `!` followed by
/// whitespace, and at every newline. Ranges are trimmed and never empty.
pub(crate) fn sentence_byte_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    let mut end = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c == '\n' {
            if let Some(s) = start.take() {
                spans.push((s, end));
            }
            continue;
        }
        if c.is_whitespace() {
            continue;
        }
        if start.is_none() {
            start = Some(i);
        }
        end = i + c.len_utf8();
        if matches!(c, '.' | '?' | '!') {
            if let Some(&(_, next)) = chars.peek() {
                if next.is_whitespace() {
                    spans.push((start.take().unwrap(), end));
                }
            }
        }
    }
    if let Some(s) = start {
        spans.push((s, end));
    }
    spans
}

/// Sentence spans as half-open character ranges.
pub fn segment_sentences(text: &str) -> Vec<(usize, usize)> {
    let idx = CharIndex::new(text);
    sentence_byte_spans(text)
        .into_iter()
        .map(|(s, e)| (idx.char_of(s), idx.char_of(e)))
        .collect()
}
