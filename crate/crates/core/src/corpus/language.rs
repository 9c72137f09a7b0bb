use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_LANGUAGE_THRESHOLD: f64 = 0.12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Language {
    English,
    Other,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::English => "en",
            Language::Other => "other",
        }
    }
}

// Closed-class English words: articles, pronouns, auxiliaries, prepositions,
// conjunctions and a few very common adverbs.
const FUNCTION_WORDS: &str = "\
a about above after again against all am an and any are as at be because been \
before being below between both but by can could did do does doing down during \
each few for from further had has have having he her here hers herself him \
himself his how i if in into is it its itself just me more most my myself no \
nor not now of off on once only or other our ours ourselves out over own same \
she should so some such than that the their theirs them themselves then there \
these they this those through to too under until up very was we were what when \
where which while who whom why will with would you your yours yourself \
yourselves also us again really would there";

fn function_words() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| FUNCTION_WORDS.split_whitespace().collect())
}

pub fn is_function_word(token: &str) -> bool {
    function_words().contains(token)
}

/// Classify a token list as English when the share of tokens found in the
/// bundled function-word list reaches `threshold`.
pub fn detect_language<S: AsRef<str>>(tokens: &[S], threshold: f64) -> Result<Language> {
    if tokens.is_empty() {
        return Err(Error::Data("cannot classify the language of an empty review".into()));
    }
    let hits = tokens.iter().filter(|t| is_function_word(t.as_ref())).count();
    let ratio = hits as f64 / tokens.len() as f64;
    Ok(if ratio >= threshold {
        Language::English
    } else {
        Language::Other
    })
}
