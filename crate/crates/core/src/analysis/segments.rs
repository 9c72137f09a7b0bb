use std::collections::{BTreeMap, HashMap};

use chrono::{Datelike, NaiveDate};
use serde::Serialize;

use crate::corpus::{HostKey, HostSegment, ListingIndex, Review};
use crate::error::Result;
use crate::metrics::{level1_adoptions, social_scores};
use crate::taxonomy::Dictionary;

/// Segment of the host at 0-based join rank `rank` among `n` hosts: the
/// first 5% (at least one host) are innovators, up to 50% early adopters,
/// the rest early majority.
pub fn segment_for_rank(rank: usize, n: usize) -> HostSegment {
    if rank * 100 < 5 * n {
        HostSegment::Innovator
    } else if rank * 100 < 50 * n {
        HostSegment::EarlyAdopter
    } else {
        HostSegment::EarlyMajority
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct HostSegmentation {
    pub segments: HashMap<HostKey, HostSegment>,
    pub join_dates: BTreeMap<HostKey, NaiveDate>,
    /// Hosts with neither a join date nor any review.
    pub unknown: Vec<HostKey>,
    /// New hosts per `(city, year)`.
    pub adoption_curve: BTreeMap<(String, i32), usize>,
}

/// Rank hosts per city by join date (listing `host_since`, else their first
/// review; ties by host id) and cut the ranking into segments.
pub fn host_segments(listings: &ListingIndex, reviews: &[Review]) -> HostSegmentation {
    let mut first_review: HashMap<HostKey, NaiveDate> = HashMap::new();
    for r in reviews {
        let (Some(l), Some(d)) = (listings.get(&r.listing_id), r.date) else { continue };
        let k = HostKey {
            city: l.city.clone(),
            host_id: l.host_id.clone(),
        };
        first_review.entry(k).and_modify(|e| *e = (*e).min(d)).or_insert(d);
    }
    let mut since: BTreeMap<HostKey, Option<NaiveDate>> = BTreeMap::new();
    for l in listings.values() {
        let k = HostKey {
            city: l.city.clone(),
            host_id: l.host_id.clone(),
        };
        let e = since.entry(k).or_insert(None);
        if let Some(d) = l.host_since {
            *e = Some(e.map_or(d, |x| x.min(d)));
        }
    }

    let mut out = HostSegmentation::default();
    let mut by_city: BTreeMap<String, Vec<(NaiveDate, String)>> = BTreeMap::new();
    for (k, s) in since {
        match s.or_else(|| first_review.get(&k).copied()) {
            Some(d) => {
                by_city.entry(k.city.clone()).or_default().push((d, k.host_id.clone()));
                *out.adoption_curve.entry((k.city.clone(), d.year())).or_default() += 1;
                out.join_dates.insert(k, d);
            }
            None => out.unknown.push(k),
        }
    }
    for (city, mut hosts) in by_city {
        hosts.sort();
        let n = hosts.len();
        for (rank, (_, host_id)) in hosts.into_iter().enumerate() {
            out.segments.insert(
                HostKey {
                    city: city.clone(),
                    host_id,
                },
                segment_for_rank(rank, n),
            );
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentScore {
    /// `None` when cities are pooled.
    pub city: Option<String>,
    pub year: i32,
    pub segment: HostSegment,
    pub score: f64,
    pub n_reviews: usize,
}

/// Social score of each host segment per year, against the population of
/// that year's segment bins. With `by_city` the population is further
/// restricted to one city. Years with fewer than two non-empty segments, or
/// with no variance across segments, are left out.
pub fn segment_social_scores(
    reviews: &[Review],
    listings: &ListingIndex,
    segmentation: &HostSegmentation,
    dict: &Dictionary,
    by_city: bool,
) -> Result<Vec<SegmentScore>> {
    type Cell<'a> = BTreeMap<HostSegment, Vec<&'a Review>>;
    let mut cells: BTreeMap<(Option<String>, i32), Cell> = BTreeMap::new();
    for r in reviews {
        let (Some(l), Some(year)) = (listings.get(&r.listing_id), r.year()) else { continue };
        let k = HostKey {
            city: l.city.clone(),
            host_id: l.host_id.clone(),
        };
        let Some(&seg) = segmentation.segments.get(&k) else { continue };
        let city = by_city.then(|| l.city.clone());
        cells.entry((city, year)).or_default().entry(seg).or_default().push(r);
    }
    let mut out = Vec::new();
    for ((city, year), segs) in cells {
        if segs.len() < 2 {
            log::warn!("year {year}: fewer than two host segments with reviews, skipped");
            continue;
        }
        let order: Vec<HostSegment> = segs.keys().copied().collect();
        let bins: Vec<&[&Review]> = segs.values().map(Vec::as_slice).collect();
        let adoptions = level1_adoptions(&bins, dict)?;
        let s: Vec<f64> = adoptions.iter().map(|a| a.0.percent).collect();
        let b: Vec<f64> = adoptions.iter().map(|a| a.1.percent).collect();
        match social_scores(&s, &b) {
            Ok(scores) => {
                for ((seg, score), bin) in order.into_iter().zip(scores).zip(&bins) {
                    out.push(SegmentScore {
                        city: city.clone(),
                        year,
                        segment: seg,
                        score,
                        n_reviews: bin.len(),
                    });
                }
            }
            Err(e) => log::warn!("year {year}: {e}, skipped"),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{index_listings, Listing, RoomType};

    fn listing(id: usize, host: &str, since: Option<NaiveDate>) -> Listing {
        Listing {
            listing_id: id.to_string(),
            host_id: host.into(),
            room_type: RoomType::EntireHome,
            latitude: None,
            longitude: None,
            city: "x".into(),
            host_since: since,
        }
    }

    fn day(n: i64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + chrono::Duration::days(n)
    }

    #[test]
    fn five_forty_five_fifty() {
        let ls = index_listings((0..100).map(|i| listing(i, &format!("h{i:03}"), Some(day(i as i64)))));
        let s = host_segments(&ls, &[]);
        let count = |seg| s.segments.values().filter(|&&v| v == seg).count();
        assert_eq!(count(HostSegment::Innovator), 5);
        assert_eq!(count(HostSegment::EarlyAdopter), 45);
        assert_eq!(count(HostSegment::EarlyMajority), 50);
        let first = HostKey {
            city: "x".into(),
            host_id: "h000".into(),
        };
        assert_eq!(s.segments[&first], HostSegment::Innovator);
    }

    #[test]
    fn single_host_is_innovator() {
        assert_eq!(segment_for_rank(0, 1), HostSegment::Innovator);
    }

    #[test]
    fn ties_broken_by_id() {
        let ls = index_listings((0..20).map(|i| listing(i, &format!("h{:02}", 19 - i), Some(day(0)))));
        let a = host_segments(&ls, &[]);
        let b = host_segments(&ls, &[]);
        assert_eq!(a, b);
        let first = HostKey {
            city: "x".into(),
            host_id: "h00".into(),
        };
        assert_eq!(a.segments[&first], HostSegment::Innovator);
        assert_eq!(a.segments.values().filter(|&&v| v == HostSegment::Innovator).count(), 1);
    }

    #[test]
    fn review_fallback_and_unknown() {
        let ls = index_listings([listing(1, "a", None), listing(2, "b", None)]);
        let rs = vec![Review::new("r", "1", "g", Some(day(400)), "x", "x")];
        let s = host_segments(&ls, &rs);
        assert_eq!(s.join_dates.len(), 1);
        assert_eq!(s.unknown.len(), 1);
        assert_eq!(s.adoption_curve[&("x".to_string(), 2011)], 1);
    }
}
