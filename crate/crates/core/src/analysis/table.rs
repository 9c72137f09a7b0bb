use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::{bin_reviews, BinContext, BinKey, Dimension, Review};
use crate::error::Result;
use crate::metrics::{aggregate_adoption, profiles, AdoptionValue};
use crate::par;
use crate::stats::regression_slope;
use crate::taxonomy::{Category, Dictionary, Tier};

/// One cell of an adoption table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdoptionRow {
    pub key: BinKey,
    pub category: Category,
    pub value: AdoptionValue,
    /// The level-1 ancestor's adoption split across its descendants at this
    /// tier in proportion to their own adoption, so that a cell's shares add
    /// up to the level-1 value.
    pub stacked_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdoptionTable {
    pub dims: Vec<Dimension>,
    pub tier: Tier,
    pub rows: Vec<AdoptionRow>,
    /// Reviews that landed in the unknown bin.
    pub unbinned: usize,
}

impl AdoptionTable {
    pub fn get(&self, key: &BinKey, category: &Category) -> Option<&AdoptionRow> {
        self.rows.iter().find(|r| &r.key == key && &r.category == category)
    }

    pub fn keys(&self) -> Vec<&BinKey> {
        let mut k: Vec<&BinKey> = self.rows.iter().map(|r| &r.key).collect();
        k.dedup();
        k
    }
}

pub(crate) fn level1_ancestor(dict: &Dictionary, c: &Category) -> Category {
    let mut cur = c.clone();
    while let Some(p) = dict.parent(&cur) {
        cur = p;
    }
    cur
}

/// Adoption of every `tier` category and every level-1 category in each
/// bin. Rows come out in bin-key order, categories in dictionary order.
pub(crate) fn cell_values<R: AsRef<[String]> + Sync>(
    docs: &[R],
    dict: &Dictionary,
    tier: Tier,
) -> Result<Vec<(Category, AdoptionValue, f64)>> {
    let index = dict.index();
    let ps = profiles(docs, &index);
    let cats: Vec<Category> = dict.categories().into_iter().filter(|c| c.tier == tier).collect();
    let agg = |c: &Category| -> Result<AdoptionValue> {
        let ids = index.level3_ids(c)?;
        let vals: Vec<f64> = ps.iter().map(|p| p.percent(&ids)).collect();
        aggregate_adoption(c, &vals)
    };
    let values: Vec<AdoptionValue> = cats.iter().map(agg).collect::<Result<_>>()?;
    let ancestors: Vec<Category> = cats.iter().map(|c| level1_ancestor(dict, c)).collect();
    let mut l1_value: BTreeMap<&Category, f64> = BTreeMap::new();
    let mut l1_sum: BTreeMap<&Category, f64> = BTreeMap::new();
    for (a, v) in ancestors.iter().zip(&values) {
        if !l1_value.contains_key(a) {
            let p = if tier == Tier::Level1 { v.percent } else { agg(a)?.percent };
            l1_value.insert(a, p);
        }
        *l1_sum.entry(a).or_default() += v.percent;
    }
    Ok(cats
        .iter()
        .zip(values)
        .zip(&ancestors)
        .map(|((c, v), a)| {
            let s = l1_sum[a];
            let stacked = if s > 0.0 { l1_value[a] * v.percent / s } else { 0.0 };
            (c.clone(), v, stacked)
        })
        .collect())
}

/// Adoption of every category at `tier` in every bin of `dims`.
pub fn adoption_table(
    reviews: &[Review],
    dims: &[Dimension],
    ctx: &BinContext<'_>,
    dict: &Dictionary,
    tier: Tier,
) -> Result<AdoptionTable> {
    let bins = bin_reviews(reviews, dims, ctx)?;
    let unbinned = bins.get(&BinKey::unknown()).map_or(0, Vec::len);
    if unbinned > 0 {
        log::info!("{unbinned} reviews could not be binned by {dims:?}");
    }
    let cells: Vec<(&BinKey, &Vec<&Review>)> = bins.iter().filter(|(k, _)| !k.is_unknown()).collect();
    let computed = par::map(&cells, |(_, docs)| cell_values(docs, dict, tier));
    let mut rows = Vec::new();
    for ((key, _), vals) in cells.iter().zip(computed) {
        for (category, value, stacked_percent) in vals? {
            rows.push(AdoptionRow {
                key: (*key).clone(),
                category,
                value,
                stacked_percent,
            });
        }
    }
    Ok(AdoptionTable {
        dims: dims.to_vec(),
        tier,
        rows,
        unbinned,
    })
}

/// Adoption by city and year.
pub fn temporal_adoption(reviews: &[Review], dict: &Dictionary, tier: Tier) -> Result<AdoptionTable> {
    adoption_table(reviews, &[Dimension::City, Dimension::Year], &BinContext::default(), dict, tier)
}

/// Least-squares trend of one category's adoption over the years of a group
/// of bins that agree on every dimension except year.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendSlope {
    pub group: BinKey,
    pub category: Category,
    /// Percentage points per year.
    pub slope: f64,
    pub n_years: usize,
}

/// Per-group, per-category OLS slope of adoption against year. Groups with
/// fewer than two years are left out.
pub fn trend_slopes(table: &AdoptionTable) -> Vec<TrendSlope> {
    let mut groups: BTreeMap<(BinKey, Category), Vec<(i32, f64)>> = BTreeMap::new();
    for r in &table.rows {
        let Some(year) = r.key.year else { continue };
        let group = BinKey {
            year: None,
            ..r.key.clone()
        };
        groups
            .entry((group, r.category.clone()))
            .or_default()
            .push((year, r.value.percent));
    }
    groups
        .into_iter()
        .filter_map(|((group, category), pts)| {
            let x: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let slope = regression_slope(&x, &y).ok()?;
            Some(TrendSlope {
                group,
                category,
                slope,
                n_years: pts.len(),
            })
        })
        .collect()
}
