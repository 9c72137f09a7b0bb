use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::{ListingIndex, Review, RoomType};
use crate::error::Result;
use crate::metrics::set_adoption;
use crate::taxonomy::{Category, Dictionary, BUSINESS, SOCIAL};

/// Change of a level-1 category's adoption for shared and private rooms
/// relative to entire homes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoomTypeChange {
    pub city: String,
    pub category: String,
    pub entire_home: f64,
    pub shared_private: f64,
    pub relative_change_pct: f64,
    pub n_entire_home: usize,
    pub n_shared_private: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RoomTypeValidation {
    pub changes: Vec<RoomTypeChange>,
    /// Cities lacking reviews for one of the two classes.
    pub skipped_cities: Vec<String>,
}

/// Business and social adoption of shared/private-room reviews relative to
/// entire-home reviews, per city. Reviews whose listing is unknown are
/// ignored.
pub fn room_type_validation(reviews: &[Review], listings: &ListingIndex, dict: &Dictionary) -> Result<RoomTypeValidation> {
    let mut by_city: BTreeMap<&str, (Vec<&Review>, Vec<&Review>)> = BTreeMap::new();
    for r in reviews {
        let Some(l) = listings.get(&r.listing_id) else { continue };
        let e = by_city.entry(r.city.as_str()).or_default();
        if l.room_type == RoomType::EntireHome {
            e.0.push(r);
        } else {
            e.1.push(r);
        }
    }
    let mut out = RoomTypeValidation::default();
    for (city, (entire, other)) in by_city {
        if entire.is_empty() || other.is_empty() {
            log::warn!("{city}: no reviews for one of the room-type classes, skipped");
            out.skipped_cities.push(city.to_owned());
            continue;
        }
        for c in [BUSINESS, SOCIAL] {
            let cat = Category::level1(c);
            let a = set_adoption(&cat, &entire, dict)?.percent;
            let b = set_adoption(&cat, &other, dict)?.percent;
            let change = if a > 0.0 { (b - a) / a * 100.0 } else { f64::NAN };
            out.changes.push(RoomTypeChange {
                city: city.to_owned(),
                category: c.to_owned(),
                entire_home: a,
                shared_private: b,
                relative_change_pct: change,
                n_entire_home: entire.len(),
                n_shared_private: other.len(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{index_listings, Listing};

    fn listing(id: &str, rt: RoomType, city: &str) -> Listing {
        Listing {
            listing_id: id.into(),
            host_id: id.into(),
            room_type: rt,
            latitude: None,
            longitude: None,
            city: city.into(),
            host_since: None,
        }
    }

    #[test]
    fn identical_sets_no_change() {
        let dict = Dictionary::reference();
        let ls = index_listings([
            listing("1", RoomType::EntireHome, "x"),
            listing("2", RoomType::PrivateRoom, "x"),
            listing("3", RoomType::EntireHome, "y"),
        ]);
        let text = "quiet area and the host was friendly and kind";
        let rs = vec![
            Review::new("a", "1", "g", None, text, "x"),
            Review::new("b", "2", "g", None, text, "x"),
            Review::new("c", "3", "g", None, text, "y"),
        ];
        let v = room_type_validation(&rs, &ls, &dict).unwrap();
        assert_eq!(v.skipped_cities, ["y"]);
        assert_eq!(v.changes.len(), 2);
        for c in &v.changes {
            assert_eq!(c.relative_change_pct, 0.0);
        }
    }
}
