use std::collections::HashMap;
use std::fmt::Write as _;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{detect_language, Language, Review, DEFAULT_LANGUAGE_THRESHOLD};
use crate::error::{Error, Result};
use crate::par;

/// Review cleaning rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub min_words: usize,
    pub max_words: usize,
    pub max_reviews_per_guest: usize,
    /// Regular expressions matched against the raw review text.
    pub cancellation_patterns: Vec<String>,
    /// Target language code; `"any"` disables the language rule.
    pub language: String,
    pub language_threshold: f64,
    pub require_date: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_words: 5,
            max_words: 175,
            max_reviews_per_guest: 10,
            cancellation_patterns: vec!["(?i)^\\s*the host canceled this reservation".into()],
            language: "en".into(),
            language_threshold: DEFAULT_LANGUAGE_THRESHOLD,
            require_date: true,
        }
    }
}

impl FilterConfig {
    /// A configuration that keeps everything.
    pub fn permissive() -> Self {
        FilterConfig {
            min_words: 0,
            max_words: usize::MAX,
            max_reviews_per_guest: usize::MAX,
            cancellation_patterns: Vec::new(),
            language: "any".into(),
            language_threshold: 0.0,
            require_date: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_words > self.max_words {
            return Err(Error::config(format!(
                "min_words ({}) exceeds max_words ({})",
                self.min_words, self.max_words
            )));
        }
        if self.max_reviews_per_guest < 1 {
            return Err(Error::config("max_reviews_per_guest must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.language_threshold) {
            return Err(Error::config("language_threshold must lie in [0, 1]"));
        }
        if !matches!(self.language.as_str(), "en" | "any") {
            return Err(Error::config(format!(
                "unsupported target language `{}` (expected `en` or `any`)",
                self.language
            )));
        }
        Ok(())
    }

    fn compile_patterns(&self) -> Result<Vec<Regex>> {
        self.cancellation_patterns
            .iter()
            .map(|p| Regex::new(p).map_err(|e| Error::config(format!("bad pattern `{p}`: {e}"))))
            .collect()
    }
}

/// Why a review was dropped. Rules apply in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Cancellation,
    MissingDate,
    TooShort,
    TooLong,
    NonEnglish,
    PowerUser,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FilterReport {
    pub input: usize,
    pub kept: usize,
    pub cancellation: usize,
    pub missing_date: usize,
    pub too_short: usize,
    pub too_long: usize,
    pub non_english: usize,
    pub power_user: usize,
}

impl FilterReport {
    fn record(&mut self, reason: DropReason) {
        let slot = match reason {
            DropReason::Cancellation => &mut self.cancellation,
            DropReason::MissingDate => &mut self.missing_date,
            DropReason::TooShort => &mut self.too_short,
            DropReason::TooLong => &mut self.too_long,
            DropReason::NonEnglish => &mut self.non_english,
            DropReason::PowerUser => &mut self.power_user,
        };
        *slot += 1;
    }

    pub fn dropped(&self) -> usize {
        self.cancellation
            + self.missing_date
            + self.too_short
            + self.too_long
            + self.non_english
            + self.power_user
    }

    /// `key=value` lines, one per counter.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        for (k, v) in [
            ("input", self.input),
            ("kept", self.kept),
            ("cancellation", self.cancellation),
            ("missing_date", self.missing_date),
            ("too_short", self.too_short),
            ("too_long", self.too_long),
            ("non_english", self.non_english),
            ("power_user", self.power_user),
        ] {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

fn per_review_reason(r: &Review, cfg: &FilterConfig, patterns: &[Regex]) -> Option<DropReason> {
    if patterns.iter().any(|p| p.is_match(&r.raw_text)) {
        return Some(DropReason::Cancellation);
    }
    if cfg.require_date && r.date.is_none() {
        return Some(DropReason::MissingDate);
    }
    if r.word_count < cfg.min_words {
        return Some(DropReason::TooShort);
    }
    if r.word_count > cfg.max_words {
        return Some(DropReason::TooLong);
    }
    if cfg.language != "any" {
        let english = match &r.language {
            Some(tag) => tag.eq_ignore_ascii_case("en"),
            None => matches!(
                detect_language(&r.tokens, cfg.language_threshold),
                Ok(Language::English)
            ),
        };
        if !english {
            return Some(DropReason::NonEnglish);
        }
    }
    None
}

/// Apply the cleaning rules in their fixed order: cancellation, missing
/// date, length, language, then power users. Power users are counted over
/// the whole input, across cities.
pub fn filter_corpus(reviews: Vec<Review>, config: &FilterConfig) -> Result<(Vec<Review>, FilterReport)> {
    config.validate()?;
    let patterns = config.compile_patterns()?;
    let mut per_guest: HashMap<&str, usize> = HashMap::new();
    for r in &reviews {
        *per_guest.entry(r.reviewer_id.as_str()).or_default() += 1;
    }
    let reasons: Vec<Option<DropReason>> = par::map(&reviews, |r| {
        per_review_reason(r, config, &patterns).or_else(|| {
            (per_guest[r.reviewer_id.as_str()] > config.max_reviews_per_guest)
                .then_some(DropReason::PowerUser)
        })
    });
    drop(per_guest);

    let mut report = FilterReport {
        input: reviews.len(),
        ..Default::default()
    };
    let mut kept = Vec::with_capacity(reviews.len());
    for (r, reason) in reviews.into_iter().zip(reasons) {
        match reason {
            Some(reason) => report.record(reason),
            None => kept.push(r),
        }
    }
    report.kept = kept.len();
    Ok((kept, report))
}
