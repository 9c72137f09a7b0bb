use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{HostSegment, ListingIndex, Review, RoomType};
use crate::error::{Error, Result};

/// A bin dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    City,
    Year,
    RoomType,
    LengthBucket,
    HostSegment,
    District,
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "city" => Dimension::City,
            "year" => Dimension::Year,
            "room_type" => Dimension::RoomType,
            "length_bucket" => Dimension::LengthBucket,
            "host_segment" => Dimension::HostSegment,
            "district" => Dimension::District,
            other => return Err(Error::config(format!("unknown bin dimension `{other}`"))),
        })
    }
}

/// Identifies a host within one city.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HostKey {
    pub city: String,
    pub host_id: String,
}

/// Inclusive word-count intervals, sorted and gap-free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthBuckets(Vec<(usize, usize)>);

impl LengthBuckets {
    /// Validate that the buckets are ordered, non-overlapping and leave no
    /// gap anywhere inside `[lo, hi]`.
    pub fn new(buckets: Vec<(usize, usize)>, lo: usize, hi: usize) -> Result<Self> {
        if buckets.is_empty() {
            return Err(Error::config("no length buckets given"));
        }
        let mut expect = lo;
        for &(a, b) in &buckets {
            if a > b {
                return Err(Error::config(format!("empty length bucket [{a}, {b}]")));
            }
            if a != expect {
                return Err(Error::config(format!(
                    "length buckets leave a gap or overlap at {expect} (next bucket starts at {a})"
                )));
            }
            expect = b.saturating_add(1);
        }
        let last = buckets.last().map(|b| b.1).unwrap_or(lo);
        if last < hi {
            return Err(Error::config(format!("length buckets stop at {last}, below {hi}")));
        }
        Ok(LengthBuckets(buckets))
    }

    /// One bucket covering `[lo, hi]`.
    pub fn single(lo: usize, hi: usize) -> Self {
        LengthBuckets(vec![(lo, hi)])
    }

    pub fn find(&self, words: usize) -> Option<(usize, usize)> {
        self.0.iter().copied().find(|&(a, b)| a <= words && words <= b)
    }

    pub fn buckets(&self) -> &[(usize, usize)] {
        &self.0
    }
}

/// Lookups needed for listing-derived dimensions.
#[derive(Default, Clone, Copy)]
pub struct BinContext<'a> {
    pub listings: Option<&'a ListingIndex>,
    pub length_buckets: Option<&'a LengthBuckets>,
    pub host_segments: Option<&'a HashMap<HostKey, HostSegment>>,
    /// listing id -> district id
    pub districts: Option<&'a HashMap<String, String>>,
}

/// The key of one bin. Unset dimensions are `None`; `unknown` marks the
/// sentinel bin that collects reviews whose requested values could not be
/// resolved.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BinKey {
    pub unknown: bool,
    pub city: Option<String>,
    pub year: Option<i32>,
    pub room_type: Option<RoomType>,
    pub length_bucket: Option<(usize, usize)>,
    pub host_segment: Option<HostSegment>,
    pub district: Option<String>,
}

impl BinKey {
    pub fn unknown() -> Self {
        BinKey {
            unknown: true,
            ..Default::default()
        }
    }

    pub fn is_unknown(&self) -> bool {
        self.unknown
    }
}

impl fmt::Display for BinKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.unknown {
            return f.write_str("unknown");
        }
        let mut parts = Vec::new();
        if let Some(c) = &self.city {
            parts.push(format!("city={c}"));
        }
        if let Some(y) = self.year {
            parts.push(format!("year={y}"));
        }
        if let Some(r) = self.room_type {
            parts.push(format!("room_type={r}"));
        }
        if let Some((a, b)) = self.length_bucket {
            parts.push(format!("length={a}-{b}"));
        }
        if let Some(s) = self.host_segment {
            parts.push(format!("segment={s}"));
        }
        if let Some(d) = &self.district {
            parts.push(format!("district={d}"));
        }
        f.write_str(&parts.join(","))
    }
}

fn check_context(spec: &[Dimension], ctx: &BinContext<'_>) -> Result<()> {
    if spec.is_empty() {
        return Err(Error::config("binning spec needs at least one dimension"));
    }
    for d in spec {
        let missing = match d {
            Dimension::RoomType => ctx.listings.is_none(),
            Dimension::HostSegment => ctx.listings.is_none() || ctx.host_segments.is_none(),
            Dimension::District => ctx.districts.is_none(),
            Dimension::LengthBucket => ctx.length_buckets.is_none(),
            Dimension::City | Dimension::Year => false,
        };
        if missing {
            return Err(Error::config(format!("no lookup data supplied for dimension {d:?}")));
        }
    }
    Ok(())
}

fn key_for(r: &Review, spec: &[Dimension], ctx: &BinContext<'_>) -> Option<BinKey> {
    let mut key = BinKey::default();
    let listing = || ctx.listings.and_then(|l| l.get(&r.listing_id));
    for d in spec {
        match d {
            Dimension::City => key.city = Some(r.city.clone()),
            Dimension::Year => key.year = Some(r.year()?),
            Dimension::RoomType => key.room_type = Some(listing()?.room_type),
            Dimension::LengthBucket => key.length_bucket = Some(ctx.length_buckets?.find(r.word_count)?),
            Dimension::HostSegment => {
                let l = listing()?;
                let hk = HostKey {
                    city: l.city.clone(),
                    host_id: l.host_id.clone(),
                };
                key.host_segment = Some(*ctx.host_segments?.get(&hk)?);
            }
            Dimension::District => key.district = Some(ctx.districts?.get(&r.listing_id)?.clone()),
        }
    }
    Some(key)
}

/// Partition reviews into bins. Every review lands in exactly one bin;
/// reviews with an unresolvable value for a requested dimension go to
/// [`BinKey::unknown`].
pub fn bin_reviews<'r>(
    reviews: &'r [Review],
    spec: &[Dimension],
    ctx: &BinContext<'_>,
) -> Result<BTreeMap<BinKey, Vec<&'r Review>>> {
    check_context(spec, ctx)?;
    let mut bins: BTreeMap<BinKey, Vec<&Review>> = BTreeMap::new();
    for r in reviews {
        let key = key_for(r, spec, ctx).unwrap_or_else(BinKey::unknown);
        bins.entry(key).or_default().push(r);
    }
    Ok(bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{index_listings, parse_date, Listing};
    use proptest::prelude::*;

    fn review(id: &str, listing: &str, date: &str, city: &str) -> Review {
        Review::new(id, listing, "g", parse_date(date), "a b c d e", city)
    }

    #[test]
    fn by_year() {
        let rs = vec![
            review("1", "1", "2011-01-01", "x"),
            review("2", "1", "2011-06-01", "x"),
            review("3", "1", "2019-01-01", "x"),
        ];
        let bins = bin_reviews(&rs, &[Dimension::Year], &BinContext::default()).unwrap();
        let sizes: Vec<usize> = bins.values().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 1]);
        assert_eq!(bins.keys().next().unwrap().year, Some(2011));
    }

    #[test]
    fn singleton() {
        let rs = vec![review("1", "1", "2011-01-01", "x")];
        let bins = bin_reviews(&rs, &[Dimension::City, Dimension::Year], &BinContext::default()).unwrap();
        assert_eq!(bins.len(), 1);
    }

    #[test]
    fn orphan_review_goes_to_unknown() {
        let listings = index_listings([Listing {
            listing_id: "1".into(),
            host_id: "h".into(),
            room_type: RoomType::PrivateRoom,
            latitude: None,
            longitude: None,
            city: "x".into(),
            host_since: None,
        }]);
        let rs = vec![review("1", "1", "2011-01-01", "x"), review("2", "404", "2011-01-01", "x")];
        let ctx = BinContext {
            listings: Some(&listings),
            ..Default::default()
        };
        let bins = bin_reviews(&rs, &[Dimension::RoomType], &ctx).unwrap();
        assert_eq!(bins[&BinKey::unknown()].len(), 1);
        assert_eq!(bins[&BinKey::unknown()][0].review_id, "2");
    }

    #[test]
    fn config_errors() {
        assert!(matches!("weekday".parse::<Dimension>(), Err(Error::Config(_))));
        let rs = vec![review("1", "1", "2011-01-01", "x")];
        assert!(bin_reviews(&rs, &[Dimension::RoomType], &BinContext::default()).is_err());
    }

    #[test]
    fn length_bucket_validation() {
        assert!(LengthBuckets::new(vec![(5, 20), (21, 175)], 5, 175).is_ok());
        assert!(LengthBuckets::new(vec![(5, 20), (22, 175)], 5, 175).is_err());
        assert!(LengthBuckets::new(vec![(5, 20)], 5, 175).is_err());
        assert!(LengthBuckets::new(vec![(6, 175)], 5, 175).is_err());
    }

    proptest! {
        #[test]
        fn bins_partition(years in prop::collection::vec(prop::option::of(2010i32..2020), 0..50)) {
            let rs: Vec<Review> = years
                .iter()
                .enumerate()
                .map(|(i, y)| {
                    let d = y.map(|y| format!("{y}-03-01")).unwrap_or_default();
                    review(&i.to_string(), "1", &d, if i % 2 == 0 { "a" } else { "b" })
                })
                .collect();
            let bins = bin_reviews(&rs, &[Dimension::City, Dimension::Year], &BinContext::default()).unwrap();
            prop_assert_eq!(bins.values().map(Vec::len).sum::<usize>(), rs.len());
        }
    }
}
