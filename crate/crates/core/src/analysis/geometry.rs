use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::corpus::ListingIndex;
use crate::error::{Error, Result};

/// A polygon ring as closed `(lon, lat)` positions.
pub type Ring = Vec<(f64, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polygon {
    pub outer: Ring,
    pub holes: Vec<Ring>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct District {
    pub district_id: String,
    pub city: String,
    pub polygons: Vec<Polygon>,
}

fn on_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    let scale = (b.0 - a.0).abs().max((b.1 - a.1).abs()).max(1.0);
    cross.abs() <= 1e-12 * scale
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

enum Side {
    Inside,
    Boundary,
    Outside,
}

fn ring_side(p: (f64, f64), ring: &[(f64, f64)]) -> Side {
    let mut inside = false;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        if on_segment(p, a, b) {
            return Side::Boundary;
        }
        if (a.1 > p.1) != (b.1 > p.1) {
            let x = a.0 + (p.1 - a.1) * (b.0 - a.0) / (b.1 - a.1);
            if p.0 < x {
                inside = !inside;
            }
        }
    }
    if inside {
        Side::Inside
    } else {
        Side::Outside
    }
}

impl Polygon {
    /// Boundary points count as inside, including hole boundaries.
    pub fn contains(&self, lon: f64, lat: f64) -> bool {
        let p = (lon, lat);
        if matches!(ring_side(p, &self.outer), Side::Outside) {
            return false;
        }
        !self.holes.iter().any(|h| matches!(ring_side(p, h), Side::Inside))
    }
}

impl District {
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        self.polygons.iter().any(|p| p.contains(lon, lat))
    }
}

/// First district, in file order, containing the point.
pub fn point_in_district(lat: f64, lon: f64, districts: &[District]) -> Option<&str> {
    districts
        .iter()
        .find(|d| d.contains(lat, lon))
        .map(|d| d.district_id.as_str())
}

fn ring(v: &Value, feature: &str) -> Result<Ring> {
    let gerr = |m: &str| Error::Geometry(format!("feature `{feature}`: {m}"));
    let pts = v.as_array().ok_or_else(|| gerr("ring is not an array"))?;
    let ring: Ring = pts
        .iter()
        .map(|p| {
            let c = p.as_array().filter(|c| c.len() >= 2).ok_or_else(|| gerr("bad position"))?;
            let x = c[0].as_f64().ok_or_else(|| gerr("non-numeric coordinate"))?;
            let y = c[1].as_f64().ok_or_else(|| gerr("non-numeric coordinate"))?;
            if !x.is_finite() || !y.is_finite() {
                return Err(gerr("non-finite coordinate"));
            }
            Ok((x, y))
        })
        .collect::<Result<_>>()?;
    if ring.len() < 4 {
        return Err(gerr("ring has fewer than 4 positions"));
    }
    if ring.first() != ring.last() {
        return Err(gerr("ring is not closed"));
    }
    Ok(ring)
}

fn polygon(v: &Value, feature: &str) -> Result<Polygon> {
    let rings = v
        .as_array()
        .filter(|r| !r.is_empty())
        .ok_or_else(|| Error::Geometry(format!("feature `{feature}`: polygon has no rings")))?;
    Ok(Polygon {
        outer: ring(&rings[0], feature)?,
        holes: rings[1..].iter().map(|r| ring(r, feature)).collect::<Result<_>>()?,
    })
}

/// Parse a GeoJSON FeatureCollection of Polygon / MultiPolygon features.
/// `id_property` names the property holding the district id.
pub fn parse_geojson(text: &str, id_property: &str, city: &str) -> Result<Vec<District>> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Geometry(format!("invalid GeoJSON: {e}")))?;
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Geometry("not a FeatureCollection".into()))?;
    features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let id = match f.get("properties").and_then(|p| p.get(id_property)) {
                Some(Value::String(s)) => s.clone(),
                Some(Value::Number(n)) => n.to_string(),
                _ => {
                    return Err(Error::Geometry(format!(
                        "feature {i} has no `{id_property}` property"
                    )))
                }
            };
            let geom = f
                .get("geometry")
                .ok_or_else(|| Error::Geometry(format!("feature `{id}` has no geometry")))?;
            let coords = geom.get("coordinates").cloned().unwrap_or(Value::Null);
            let polygons = match geom.get("type").and_then(Value::as_str) {
                Some("Polygon") => vec![polygon(&coords, &id)?],
                Some("MultiPolygon") => coords
                    .as_array()
                    .ok_or_else(|| Error::Geometry(format!("feature `{id}`: bad MultiPolygon")))?
                    .iter()
                    .map(|p| polygon(p, &id))
                    .collect::<Result<_>>()?,
                other => {
                    return Err(Error::Geometry(format!(
                        "feature `{id}`: unsupported geometry {other:?}"
                    )))
                }
            };
            Ok(District {
                district_id: id,
                city: city.to_owned(),
                polygons,
            })
        })
        .collect()
}

pub fn load_geojson(path: impl AsRef<Path>, id_property: &str, city: &str) -> Result<Vec<District>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_geojson(&text, id_property, city)
}

/// Map each listing with coordinates to the first district of its city
/// containing it. Listings of cities without districts are ignored. Returns
/// the mapping and the number of listings left out.
pub fn assign_districts(listings: &ListingIndex, districts: &[District]) -> (HashMap<String, String>, usize) {
    let cities: HashSet<&str> = districts.iter().map(|d| d.city.as_str()).collect();
    let mut map = HashMap::new();
    let mut missed = 0;
    let mut ids: Vec<&String> = listings
        .iter()
        .filter(|(_, l)| cities.contains(l.city.as_str()))
        .map(|(id, _)| id)
        .collect();
    ids.sort();
    for id in ids {
        let l = &listings[id];
        let hit = l.coordinates().and_then(|(lat, lon)| {
            districts
                .iter()
                .filter(|d| d.city == l.city)
                .find(|d| d.contains(lat, lon))
        });
        match hit {
            Some(d) => {
                map.insert(id.clone(), d.district_id.clone());
            }
            None => missed += 1,
        }
    }
    (map, missed)
}

/// Read a `listing_id,district_id` CSV.
pub fn read_district_csv(path: impl AsRef<Path>) -> Result<HashMap<String, String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: name.to_owned(),
        })
    };
    let (cl, cd) = (col("listing_id")?, col("district_id")?);
    let mut out = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        if let (Some(l), Some(d)) = (rec.get(cl), rec.get(cd)) {
            if !l.is_empty() && !d.is_empty() {
                out.insert(l.to_owned(), d.to_owned());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(id: &str, x0: f64, y0: f64, s: f64) -> District {
        District {
            district_id: id.into(),
            city: "c".into(),
            polygons: vec![Polygon {
                outer: vec![(x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s), (x0, y0)],
                holes: vec![],
            }],
        }
    }

    #[test]
    fn unit_square() {
        let d = vec![square("a", 0.0, 0.0, 1.0)];
        assert_eq!(point_in_district(0.5, 0.5, &d), Some("a"));
        assert_eq!(point_in_district(1.5, 0.5, &d), None);
        assert_eq!(point_in_district(0.5, 1.5, &d), None);
        assert_eq!(point_in_district(1.0, 0.5, &d), Some("a"));
        assert_eq!(point_in_district(0.0, 0.0, &d), Some("a"));
    }

    #[test]
    fn shared_edge_goes_to_first() {
        let d = vec![square("a", 0.0, 0.0, 1.0), square("b", 1.0, 0.0, 1.0)];
        // lon 1.0 is the shared edge
        assert_eq!(point_in_district(0.5, 1.0, &d), Some("a"));
        assert_eq!(point_in_district(0.5, 1.5, &d), Some("b"));
    }

    #[test]
    fn geojson_with_hole() {
        let text = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"ward":"W1"},"geometry":{"type":"Polygon","coordinates":[
                [[0,0],[10,0],[10,10],[0,10],[0,0]],
                [[4,4],[6,4],[6,6],[4,6],[4,4]]]}},
            {"type":"Feature","properties":{"ward":7},"geometry":{"type":"MultiPolygon","coordinates":[
                [[[20,0],[21,0],[21,1],[20,1],[20,0]]]]}}]}"#;
        let d = parse_geojson(text, "ward", "c").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(point_in_district(1.0, 1.0, &d), Some("W1"));
        assert_eq!(point_in_district(5.0, 5.0, &d), None);
        assert_eq!(point_in_district(4.0, 5.0, &d), Some("W1"));
        assert_eq!(point_in_district(0.5, 20.5, &d), Some("7"));
    }

    #[test]
    fn malformed_rings() {
        let open = r#"{"features":[{"properties":{"id":"a"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1]]]}}]}"#;
        assert!(matches!(parse_geojson(open, "id", "c"), Err(Error::Geometry(_))));
        let short = r#"{"features":[{"properties":{"id":"a"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[0,0]]]}}]}"#;
        assert!(matches!(parse_geojson(short, "id", "c"), Err(Error::Geometry(_))));
    }
}
