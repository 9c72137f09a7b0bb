use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::corpus::{ListingIndex, Review};
use crate::error::Result;
use crate::metrics::{level1_adoptions, social_scores};
use crate::stats::{pearson, Correlation};
use crate::taxonomy::Dictionary;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistrictRow {
    pub city: String,
    pub district: String,
    /// Listings in the district with at least one review.
    pub active_listings: usize,
    /// `active_listings` over the city's largest district count.
    pub penetration: f64,
    /// `None` when the city's scores could not be computed.
    pub social_score: Option<f64>,
    pub n_reviews: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CityCorrelation {
    pub city: String,
    pub correlation: Correlation,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NeighbourhoodReport {
    pub districts: Vec<DistrictRow>,
    pub correlations: Vec<CityCorrelation>,
    /// Cities whose correlation was skipped.
    pub skipped_cities: Vec<String>,
}

/// Penetration rate and social score of each district, with the per-city
/// Pearson correlation between the two. `districts` maps listing id to
/// district id; reviews of listings without a district are ignored.
pub fn neighbourhood_analysis(
    reviews: &[Review],
    listings: &ListingIndex,
    districts: &HashMap<String, String>,
    dict: &Dictionary,
) -> Result<NeighbourhoodReport> {
    type Cell<'a> = (BTreeSet<&'a str>, Vec<&'a Review>);
    let mut cities: BTreeMap<&str, BTreeMap<&str, Cell>> = BTreeMap::new();
    for r in reviews {
        let (Some(l), Some(d)) = (listings.get(&r.listing_id), districts.get(&r.listing_id)) else { continue };
        let cell = cities.entry(l.city.as_str()).or_default().entry(d.as_str()).or_default();
        cell.0.insert(l.listing_id.as_str());
        cell.1.push(r);
    }

    let mut out = NeighbourhoodReport::default();
    for (city, cells) in cities {
        let max = cells.values().map(|c| c.0.len()).max().unwrap_or(0);
        let bins: Vec<&[&Review]> = cells.values().map(|c| c.1.as_slice()).collect();
        let scores = if bins.len() < 2 {
            log::warn!("{city}: fewer than two districts with reviews");
            None
        } else {
            let adoptions = level1_adoptions(&bins, dict)?;
            let s: Vec<f64> = adoptions.iter().map(|a| a.0.percent).collect();
            let b: Vec<f64> = adoptions.iter().map(|a| a.1.percent).collect();
            match social_scores(&s, &b) {
                Ok(v) => Some(v),
                Err(e) => {
                    log::warn!("{city}: {e}");
                    None
                }
            }
        };
        let rows: Vec<DistrictRow> = cells
            .iter()
            .enumerate()
            .map(|(i, (d, c))| DistrictRow {
                city: city.to_owned(),
                district: (*d).to_owned(),
                active_listings: c.0.len(),
                penetration: c.0.len() as f64 / max as f64,
                social_score: scores.as_ref().map(|s| s[i]),
                n_reviews: c.1.len(),
            })
            .collect();
        let corr = match &scores {
            Some(s) if rows.len() >= 3 => {
                let x: Vec<f64> = rows.iter().map(|r| r.penetration).collect();
                match pearson(&x, s) {
                    Ok(c) => Some(c),
                    Err(e) => {
                        log::warn!("{city}: {e}, correlation skipped");
                        None
                    }
                }
            }
            _ => None,
        };
        match corr {
            Some(correlation) => out.correlations.push(CityCorrelation {
                city: city.to_owned(),
                correlation,
            }),
            None => out.skipped_cities.push(city.to_owned()),
        }
        out.districts.extend(rows);
    }
    Ok(out)
}
