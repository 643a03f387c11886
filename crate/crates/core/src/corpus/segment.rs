use regex::Regex;

/// Boundary pattern: sentence-final punctuation, a whitespace gap, then an
/// uppercase letter or digit. The `gap` group is what separates sentences.
pub const DEFAULT_SENTENCE_PATTERN: &str = r"[.!?](?P<gap>\s+)[\p{Lu}\p{Nd}]";

#[derive(Debug, Clone)]
pub struct Segmenter {
    pattern: Regex,
}

#[derive(Debug, thiserror::Error)]
pub enum SegmenterError {
    #[error("invalid sentence pattern: {0}")]
    Regex(#[from] regex::Error),
    #[error("sentence pattern must contain a capture group named `gap`")]
    MissingGapGroup,
}

impl Segmenter {
    pub fn new(pattern: &str) -> Result<Self, SegmenterError> {
        let pattern = Regex::new(pattern)?;
        if !pattern.capture_names().any(|n| n == Some("gap")) {
            return Err(SegmenterError::MissingGapGroup);
        }
        Ok(Segmenter { pattern })
    }

    /// Sentence spans of `text` as byte ranges. Text between sentences
    /// (the matched gaps) belongs to no sentence.
    pub fn segment_bytes(&self, text: &str) -> Vec<(usize, usize)> {
        if text.is_empty() {
            return Vec::new();
        }
        let mut spans = Vec::new();
        let mut start = 0;
        for caps in self.pattern.captures_iter(text) {
            let Some(gap) = caps.name("gap") else { continue };
            if gap.start() <= start || gap.is_empty() {
                continue;
            }
            spans.push((start, gap.start()));
            start = gap.end();
        }
        spans.push((start, text.len()));
        spans
    }
}

impl Default for Segmenter {
    fn default() -> Self {
        Segmenter::new(DEFAULT_SENTENCE_PATTERN).expect("default pattern is valid")
    }
}
