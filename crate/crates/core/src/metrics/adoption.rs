use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;
use crate::taxonomy::{Category, Dictionary, DictionaryIndex};

/// Sets of at most this many reviews are flagged as too small for a 2%
/// error bound at 95% confidence.
pub const MIN_RELIABLE_SAMPLE: usize = 1000;

/// `1 + ln(count)`, or 0 for an absent word.
pub fn log_tf(count: u64) -> f64 {
    if count == 0 {
        0.0
    } else {
        1.0 + (count as f64).ln()
    }
}

/// Log-tf mass of one review, split by level-3 category.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReviewProfile {
    /// Numerator mass per level-3 id of the [`DictionaryIndex`].
    pub level3: Vec<f64>,
    /// Log-tf mass over every distinct word of the review.
    pub total: f64,
}

impl ReviewProfile {
    pub fn of(tokens: &[String], index: &DictionaryIndex) -> Self {
        let mut sorted: Vec<&str> = tokens.iter().map(String::as_str).collect();
        sorted.sort_unstable();
        let mut level3 = vec![0.0; index.l3.len()];
        let mut total = 0.0;
        let mut i = 0;
        while i < sorted.len() {
            let w = sorted[i];
            let mut j = i + 1;
            while j < sorted.len() && sorted[j] == w {
                j += 1;
            }
            let t = log_tf((j - i) as u64);
            total += t;
            if let Some(&c) = index.word_l3.get(w) {
                level3[c] += t;
            }
            i = j;
        }
        ReviewProfile { level3, total }
    }

    /// Percent adoption of the union of the given level-3 categories.
    pub fn percent(&self, level3_ids: &[usize]) -> f64 {
        if self.total == 0.0 {
            return 0.0;
        }
        let num: f64 = level3_ids.iter().map(|&i| self.level3[i]).sum();
        (100.0 * num / self.total).min(100.0)
    }
}

/// Profiles for many documents, in input order.
pub fn profiles<D>(docs: &[D], index: &DictionaryIndex) -> Vec<ReviewProfile>
where
    D: AsRef<[String]> + Sync,
{
    par::map(docs, |d| ReviewProfile::of(d.as_ref(), index))
}

/// Adoption of `category` in one review, in percent.
pub fn review_adoption(category: &Category, tokens: &[String], dict: &Dictionary) -> Result<f64> {
    let index = dict.index();
    let ids = index.level3_ids(category)?;
    Ok(ReviewProfile::of(tokens, &index).percent(&ids))
}

/// Per-review adoption of `category` for every document.
pub fn review_adoptions<D>(category: &Category, docs: &[D], dict: &Dictionary) -> Result<Vec<f64>>
where
    D: AsRef<[String]> + Sync,
{
    let index = dict.index();
    let ids = index.level3_ids(category)?;
    Ok(par::map(docs, |d| ReviewProfile::of(d.as_ref(), &index).percent(&ids)))
}

/// Adoption of one category over a set of reviews.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdoptionValue {
    pub category: Category,
    pub percent: f64,
    pub n_reviews: usize,
    pub k_offset: f64,
    pub below_min_sample: bool,
}

/// Offset geometric mean of per-review adoption values: `k` is the smallest
/// nonzero value (0 when all are zero), added before and subtracted after.
pub fn aggregate_adoption(category: &Category, values: &[f64]) -> Result<AdoptionValue> {
    if values.is_empty() {
        return Err(Error::arith(format!("adoption of {category} over an empty review set")));
    }
    let k = values
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let (percent, k) = if k.is_finite() {
        let mean_log = values.iter().map(|v| (v + k).ln()).sum::<f64>() / values.len() as f64;
        ((mean_log.exp() - k).clamp(0.0, 100.0), k)
    } else {
        (0.0, 0.0)
    };
    Ok(AdoptionValue {
        category: category.clone(),
        percent,
        n_reviews: values.len(),
        k_offset: k,
        below_min_sample: values.len() <= MIN_RELIABLE_SAMPLE,
    })
}

/// Adoption of `category` over a set of reviews.
pub fn set_adoption<D>(category: &Category, docs: &[D], dict: &Dictionary) -> Result<AdoptionValue>
where
    D: AsRef<[String]> + Sync,
{
    let values = review_adoptions(category, docs, dict)?;
    aggregate_adoption(category, &values)
}
