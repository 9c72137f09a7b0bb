use super::adoption::{aggregate_adoption, profiles, AdoptionValue};
use crate::error::{Error, Result};
use crate::stats::zscores;
use crate::taxonomy::{Category, Dictionary, BUSINESS, SOCIAL};

/// Social score of every bin given each bin's social and business adoption:
/// the z-score of social adoption minus the z-score of business adoption,
/// both taken across the bins.
pub fn social_scores(social: &[f64], business: &[f64]) -> Result<Vec<f64>> {
    if social.len() != business.len() {
        return Err(Error::arith("social and business adoption lists differ in length"));
    }
    if social.len() < 2 {
        return Err(Error::arith("social score needs at least 2 bins"));
    }
    let zs = zscores(social).map_err(|_| Error::arith("social adoption has zero variance across bins"))?;
    let zb = zscores(business).map_err(|_| Error::arith("business adoption has zero variance across bins"))?;
    Ok(zs.iter().zip(&zb).map(|(s, b)| s - b).collect())
}

/// Social and business adoption of each bin.
pub fn level1_adoptions<D>(bins: &[&[D]], dict: &Dictionary) -> Result<Vec<(AdoptionValue, AdoptionValue)>>
where
    D: AsRef<[String]> + Sync,
{
    let index = dict.index();
    let social = Category::level1(SOCIAL);
    let business = Category::level1(BUSINESS);
    let s_ids = index.level3_ids(&social)?;
    let b_ids = index.level3_ids(&business)?;
    bins.iter()
        .map(|bin| {
            let ps = profiles(bin, &index);
            let sv: Vec<f64> = ps.iter().map(|p| p.percent(&s_ids)).collect();
            let bv: Vec<f64> = ps.iter().map(|p| p.percent(&b_ids)).collect();
            Ok((aggregate_adoption(&social, &sv)?, aggregate_adoption(&business, &bv)?))
        })
        .collect()
}

/// Social score of `bins[target]` against the population `bins`.
pub fn social_score<D>(target: usize, bins: &[&[D]], dict: &Dictionary) -> Result<f64>
where
    D: AsRef<[String]> + Sync,
{
    if target >= bins.len() {
        return Err(Error::config(format!("target bin {target} is not among the {} bins", bins.len())));
    }
    let adoptions = level1_adoptions(bins, dict)?;
    let s: Vec<f64> = adoptions.iter().map(|a| a.0.percent).collect();
    let b: Vec<f64> = adoptions.iter().map(|a| a.1.percent).collect();
    Ok(social_scores(&s, &b)?[target])
}
