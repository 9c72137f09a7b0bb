use chrono::{Datelike, NaiveDate};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::table::{adoption_table, temporal_adoption, trend_slopes, AdoptionTable, TrendSlope};
use crate::corpus::{BinContext, Dimension, LengthBuckets, ListingIndex, Review};
use crate::error::{Error, Result};
use crate::metrics::review_adoptions;
use crate::stats::{wilcoxon_rank_sum, TestResult};
use crate::taxonomy::{Category, Dictionary, Tier, BUSINESS, SOCIAL};

/// Inclusive year range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearRange {
    pub from: i32,
    pub to: i32,
}

impl YearRange {
    pub fn new(from: i32, to: i32) -> Self {
        YearRange { from, to }
    }

    pub fn contains(&self, year: i32) -> bool {
        self.from <= year && year <= self.to
    }
}

pub const DEFAULT_EARLY: YearRange = YearRange { from: 2010, to: 2012 };
pub const DEFAULT_LATE: YearRange = YearRange { from: 2017, to: 2019 };

fn with_year(d: NaiveDate, year: i32) -> NaiveDate {
    // 29 February has no counterpart in most years
    d.with_year(year)
        .or_else(|| NaiveDate::from_ymd_opt(year, d.month(), 28))
        .expect("valid date")
}

/// Give review `i` the year of review `perm[i]` (undated reviews keep no
/// date). `perm` indexes the dated reviews only.
pub fn apply_year_permutation(reviews: &[Review], perm: &[usize]) -> Result<Vec<Review>> {
    let years: Vec<i32> = reviews.iter().filter_map(Review::year).collect();
    if perm.len() != years.len() {
        return Err(Error::config(format!(
            "permutation has {} entries for {} dated reviews",
            perm.len(),
            years.len()
        )));
    }
    let mut k = 0;
    Ok(reviews
        .iter()
        .map(|r| {
            let mut r = r.clone();
            if let Some(d) = r.date {
                r.date = Some(with_year(d, years[perm[k]]));
                k += 1;
            }
            r
        })
        .collect())
}

/// Uniformly random permutation of the dated reviews' years.
pub fn shuffle_years(reviews: &[Review], seed: u64) -> Vec<Review> {
    let n = reviews.iter().filter(|r| r.date.is_some()).count();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    apply_year_permutation(reviews, &perm).expect("permutation sized to the corpus")
}

/// Early-vs-late rank-sum comparison of per-review adoption.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodComparison {
    pub category: Category,
    pub shuffled: bool,
    pub early_n: usize,
    pub late_n: usize,
    pub test: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullModelReport {
    pub observed: AdoptionTable,
    pub shuffled: AdoptionTable,
    /// Per-city slopes of the observed and shuffled tables.
    pub observed_slopes: Vec<TrendSlope>,
    pub shuffled_slopes: Vec<TrendSlope>,
    /// Slopes with all cities pooled, observed and shuffled.
    pub pooled_observed_slopes: Vec<TrendSlope>,
    pub pooled_shuffled_slopes: Vec<TrendSlope>,
    pub comparisons: Vec<PeriodComparison>,
}

fn compare_periods(
    reviews: &[Review],
    dict: &Dictionary,
    early: YearRange,
    late: YearRange,
    shuffled: bool,
) -> Result<Vec<PeriodComparison>> {
    let pick = |range: YearRange| -> Vec<&Review> {
        reviews
            .iter()
            .filter(|r| r.year().is_some_and(|y| range.contains(y)))
            .collect()
    };
    let (e, l) = (pick(early), pick(late));
    if e.is_empty() || l.is_empty() {
        return Err(Error::config(format!(
            "no reviews in {}-{} or {}-{}",
            early.from, early.to, late.from, late.to
        )));
    }
    [BUSINESS, SOCIAL]
        .iter()
        .map(|c| {
            let cat = Category::level1(*c);
            let a = review_adoptions(&cat, &e, dict)?;
            let b = review_adoptions(&cat, &l, dict)?;
            Ok(PeriodComparison {
                category: cat,
                shuffled,
                early_n: a.len(),
                late_n: b.len(),
                test: wilcoxon_rank_sum(&a, &b)?,
            })
        })
        .collect()
}

/// Year-shuffled null model with early-vs-late comparisons on both the
/// observed and the shuffled corpus.
pub fn null_model(
    reviews: &[Review],
    dict: &Dictionary,
    seed: u64,
    early: YearRange,
    late: YearRange,
) -> Result<NullModelReport> {
    let mut years: Vec<i32> = reviews.iter().filter_map(Review::year).collect();
    years.sort_unstable();
    years.dedup();
    if years.len() < 3 {
        return Err(Error::config(format!(
            "null model needs at least 3 distinct years, corpus has {}",
            years.len()
        )));
    }
    let shuffled = shuffle_years(reviews, seed);
    let observed = temporal_adoption(reviews, dict, Tier::Level1)?;
    let shuffled_table = temporal_adoption(&shuffled, dict, Tier::Level1)?;
    let pooled = |rs: &[Review]| -> Result<Vec<TrendSlope>> {
        let t = adoption_table(rs, &[Dimension::Year], &BinContext::default(), dict, Tier::Level1)?;
        Ok(trend_slopes(&t))
    };
    let mut comparisons = compare_periods(reviews, dict, early, late, false)?;
    comparisons.extend(compare_periods(&shuffled, dict, early, late, true)?);
    Ok(NullModelReport {
        observed_slopes: trend_slopes(&observed),
        shuffled_slopes: trend_slopes(&shuffled_table),
        pooled_observed_slopes: pooled(reviews)?,
        pooled_shuffled_slopes: pooled(&shuffled)?,
        observed,
        shuffled: shuffled_table,
        comparisons,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfoundReport {
    pub by_length: AdoptionTable,
    pub by_room_type: Option<AdoptionTable>,
    pub length_slopes: Vec<TrendSlope>,
    pub room_type_slopes: Vec<TrendSlope>,
}

/// Adoption trends recomputed within review-length buckets and, when
/// listings are available, within room types.
pub fn confound_analysis(
    reviews: &[Review],
    dict: &Dictionary,
    buckets: &LengthBuckets,
    listings: Option<&ListingIndex>,
    tier: Tier,
) -> Result<ConfoundReport> {
    let ctx = BinContext {
        listings,
        length_buckets: Some(buckets),
        ..Default::default()
    };
    let by_length = adoption_table(reviews, &[Dimension::Year, Dimension::LengthBucket], &ctx, dict, tier)?;
    let by_room_type = match listings {
        Some(_) => Some(adoption_table(reviews, &[Dimension::Year, Dimension::RoomType], &ctx, dict, tier)?),
        None => None,
    };
    Ok(ConfoundReport {
        length_slopes: trend_slopes(&by_length),
        room_type_slopes: by_room_type.as_ref().map(trend_slopes).unwrap_or_default(),
        by_length,
        by_room_type,
    })
}
