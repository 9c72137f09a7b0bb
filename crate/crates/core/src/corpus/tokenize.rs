/// Lowercase unigrams: the text is lowercased, then split on every run of
/// non-letter characters. Digits and punctuation never survive, and surface
/// forms are kept as-is (no stemming).
pub fn tokenize(raw_text: &str) -> Vec<String> {
    raw_text
        .to_lowercase()
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Split free text into sentences on `.`, `!` and `?`. Used when exporting
/// review sentences for annotation.
pub fn split_sentences(text: &str) -> Vec<String> {
    text.split(['.', '!', '?'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}
