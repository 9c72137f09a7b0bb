//! Synthetic corpora with controlled lexicon mixing rates, for tests,
//! benchmarks and the bundled demo fixture.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{District, Polygon, YearRange};
use crate::corpus::{is_function_word, Listing, Review, RoomType};
use crate::error::{Error, Result};
use crate::induction::LabeledSentence;
use crate::pipeline::{CityInput, RunConfig};
use crate::taxonomy::{Category, Dictionary, Tier, BUSINESS, SOCIAL};

const SYLLABLES: [&str; 16] = [
    "ka", "lo", "mi", "ne", "ru", "so", "ti", "vu", "ze", "ba", "do", "fi", "gu", "ha", "jo", "pe",
];

/// A made-up word, distinct for every `i < 16^4`.
pub fn pseudo_word(i: usize) -> String {
    let mut s = String::new();
    let mut n = i;
    for _ in 0..3 {
        s.push_str(SYLLABLES[n % 16]);
        n /= 16;
    }
    if n > 0 {
        s.push_str(SYLLABLES[n % 16]);
    }
    s
}

const FUNCTION_FILLER: &[&str] = &[
    "the", "and", "a", "was", "we", "it", "to", "of", "in", "with", "for", "is", "our", "very", "this", "at",
    "on", "were", "you", "they", "had", "so", "all", "as", "but", "there", "would", "again",
];

/// Word pools drawn on by the generators.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    pub business: Vec<String>,
    pub social: Vec<String>,
    /// Level-2 label to its words.
    pub themes: BTreeMap<String, Vec<String>>,
    /// Word lists of the level-3 categories under each level-1 category.
    pub business_groups: Vec<Vec<String>>,
    pub social_groups: Vec<Vec<String>>,
    pub function: Vec<String>,
    /// Non-dictionary content words. Word `i` leans towards group
    /// `i % (business_groups + social_groups)`.
    pub neutral: Vec<String>,
}

/// Words per phrase. Each phrase sticks to one level-3 category so that
/// category members co-occur, which is what embeddings learn from.
const PHRASE: usize = 8;

impl Vocabulary {
    pub fn from_dictionary(dict: &Dictionary) -> Result<Self> {
        let words = |c: Category| -> Result<Vec<String>> {
            Ok(dict.words_in(&c)?.into_iter().map(str::to_owned).collect())
        };
        let mut themes = BTreeMap::new();
        for (l2, _) in dict.level2() {
            themes.insert(l2.to_owned(), words(Category::new(Tier::Level2, l2))?);
        }
        let business = words(Category::level1(BUSINESS))?;
        let social = words(Category::level1(SOCIAL))?;
        if business.is_empty() || social.is_empty() {
            return Err(Error::config("dictionary needs business and social words"));
        }
        let groups = |l1: &str| -> Result<Vec<Vec<String>>> {
            let mut out = Vec::new();
            for l3 in dict.level3_under(&Category::level1(l1))? {
                let ws = words(Category::new(Tier::Level3, l3))?;
                if !ws.is_empty() {
                    out.push(ws);
                }
            }
            Ok(out)
        };
        Ok(Vocabulary {
            business,
            social,
            themes,
            business_groups: groups(BUSINESS)?,
            social_groups: groups(SOCIAL)?,
            function: FUNCTION_FILLER
                .iter()
                .filter(|w| !dict.contains(w) && is_function_word(w))
                .map(|w| (*w).to_owned())
                .collect(),
            neutral: (0..300).map(|i| pseudo_word(2000 + i)).filter(|w| !dict.contains(w)).collect(),
        })
    }

    fn filler(&self, rng: &mut impl Rng) -> &str {
        if rng.random::<f64>() < 0.45 {
            self.function.choose(rng).expect("non-empty")
        } else {
            self.neutral.choose(rng).expect("non-empty")
        }
    }

    /// Filler for a phrase about group `g`: half the content words come from
    /// the neutral words leaning towards `g`.
    fn topical_filler(&self, rng: &mut impl Rng, g: usize) -> &str {
        let n_groups = self.business_groups.len() + self.social_groups.len();
        if rng.random::<f64>() < 0.45 || rng.random::<f64>() < 0.5 {
            return self.filler(rng);
        }
        let per = self.neutral.len().div_ceil(n_groups);
        let i = g + n_groups * rng.random_range(0..per);
        self.neutral.get(i).map_or_else(|| self.filler(rng), String::as_str)
    }

    /// `n` words with business and social tokens at the given expected rates
    /// and filler elsewhere. Words come in phrases about one level-3
    /// category, picked business or social in proportion to the two rates.
    pub fn mix(&self, rng: &mut impl Rng, n: usize, p_business: f64, p_social: f64) -> Vec<String> {
        let p_dict = p_business + p_social;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let social = p_dict > 0.0 && rng.random::<f64>() < p_social / p_dict;
            let (groups, offset) = if social {
                (&self.social_groups, self.business_groups.len())
            } else {
                (&self.business_groups, 0)
            };
            let g = rng.random_range(0..groups.len());
            for _ in 0..PHRASE.min(n - out.len()) {
                let w = if rng.random::<f64>() < p_dict {
                    groups[g].choose(rng).expect("non-empty").as_str()
                } else {
                    self.topical_filler(rng, offset + g)
                };
                out.push(w.to_owned());
            }
        }
        out
    }
}

fn sentence_text(words: &[String]) -> String {
    let mut s = words.join(" ");
    if let Some(c) = s.get(0..1) {
        let up = c.to_uppercase();
        s.replace_range(0..1, &up);
    }
    s.push('.');
    s
}

/// Scale social to `p_social` and shrink every other class to make room,
/// as if the extra social tokens replaced tokens at random.
fn inject_social(p_business: f64, p_social: f64, factor: f64) -> (f64, f64) {
    let s = (p_social * factor).min(0.9);
    let b = if p_social < 1.0 { p_business * (1.0 - s) / (1.0 - p_social) } else { 0.0 };
    (b, s)
}

/// Parameters of a synthetic rental market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketConfig {
    pub cities: Vec<String>,
    pub hosts_per_city: usize,
    /// Districts form a `grid x grid` square per city.
    pub grid: usize,
    pub first_year: i32,
    pub last_year: i32,
    pub reviews_per_listing: (usize, usize),
    pub words_per_review: (usize, usize),
    /// Share of listings that are private or shared rooms.
    pub room_share: f64,
    /// Token rates at `first_year`, with per-year drift.
    pub business_rate: f64,
    pub business_slope: f64,
    pub social_rate: f64,
    pub social_slope: f64,
    /// Social-rate multiplier for private and shared rooms.
    pub room_social_factor: f64,
    /// Social-rate multiplier for reviews of innovator hosts.
    pub innovator_social_factor: f64,
    /// Social-rate multiplier runs linearly from `1 + g` in the emptiest
    /// district to `1 - g` in the densest.
    pub district_gradient: f64,
    /// Share of extra junk reviews (cancellations, foreign language, no date).
    pub noise_rate: f64,
    pub seed: u64,
}

impl Default for MarketConfig {
    fn default() -> Self {
        MarketConfig {
            cities: vec!["northport".into(), "southvale".into()],
            hosts_per_city: 150,
            grid: 3,
            first_year: 2010,
            last_year: 2019,
            reviews_per_listing: (3, 10),
            words_per_review: (20, 60),
            room_share: 0.35,
            business_rate: 0.14,
            business_slope: 0.003,
            social_rate: 0.05,
            social_slope: -0.002,
            room_social_factor: 2.0,
            innovator_social_factor: 2.0,
            district_gradient: 0.5,
            noise_rate: 0.0,
            seed: 7,
        }
    }
}

impl MarketConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::config(format!("market config: {m}")));
        if self.cities.is_empty() || self.hosts_per_city == 0 || self.grid == 0 {
            return bad("needs at least one city, host and district");
        }
        if self.first_year > self.last_year {
            return bad("first_year after last_year");
        }
        let (a, b) = self.reviews_per_listing;
        let (c, d) = self.words_per_review;
        if a > b || c > d || c == 0 {
            return bad("empty count range");
        }
        let rates = [self.room_share, self.business_rate, self.social_rate, self.noise_rate];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return bad("rates must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.district_gradient) {
            return bad("district_gradient must lie in [0, 1)");
        }
        Ok(())
    }
}

/// A generated market: listings, their reviews and the district map.
#[derive(Debug, Clone, PartialEq)]
pub struct Market {
    pub listings: Vec<Listing>,
    pub reviews: Vec<Review>,
    pub districts: Vec<District>,
    /// listing id -> district id
    pub listing_district: HashMap<String, String>,
}

const CITY_LAT: f64 = 40.0;
const CELL: f64 = 0.02;

fn district_square(city_idx: usize, row: usize, col: usize) -> Polygon {
    let x0 = 10.0 * city_idx as f64 + col as f64 * CELL;
    let y0 = CITY_LAT + row as f64 * CELL;
    Polygon {
        outer: vec![(x0, y0), (x0 + CELL, y0), (x0 + CELL, y0 + CELL), (x0, y0 + CELL), (x0, y0)],
        holes: vec![],
    }
}

const CANCELLATION: &str =
    "The host canceled this reservation 12 days before arrival. This is an automated posting.";
const FOREIGN: &str = "La casa era muy bonita y el anfitrion fue muy amable con nosotros durante toda la estancia.";

pub fn generate_market(cfg: &MarketConfig, dict: &Dictionary) -> Result<Market> {
    cfg.validate()?;
    let vocab = Vocabulary::from_dictionary(dict)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_d = cfg.grid * cfg.grid;
    // district d has weight n_d - d, so district 0 is the densest
    let weights: Vec<f64> = (0..n_d).map(|d| (n_d - d) as f64).collect();
    let pick = WeightedIndex::new(&weights).expect("positive weights");
    let factor = |d: usize| {
        if n_d == 1 {
            1.0
        } else {
            let t = (weights[d] - 1.0) / (n_d as f64 - 1.0);
            1.0 + cfg.district_gradient * (1.0 - 2.0 * t)
        }
    };
    let start = NaiveDate::from_ymd_opt(cfg.first_year, 1, 1).ok_or_else(|| Error::config("bad first_year"))?;
    let end = NaiveDate::from_ymd_opt(cfg.last_year, 12, 31).ok_or_else(|| Error::config("bad last_year"))?;
    let join_span = (NaiveDate::from_ymd_opt(cfg.last_year, 7, 1).expect("valid") - start).num_days().max(1);
    let innovators = cfg.hosts_per_city.div_ceil(20);

    let mut market = Market {
        listings: Vec::new(),
        reviews: Vec::new(),
        districts: Vec::new(),
        listing_district: HashMap::new(),
    };
    let mut reviewer = 0usize;
    for (ci, city) in cfg.cities.iter().enumerate() {
        for d in 0..n_d {
            market.districts.push(District {
                district_id: format!("{city}-d{d}"),
                city: city.clone(),
                polygons: vec![district_square(ci, d / cfg.grid, d % cfg.grid)],
            });
        }
        for h in 0..cfg.hosts_per_city {
            let listing_id = (ci * 1_000_000 + h + 1).to_string();
            let d = pick.sample(&mut rng);
            let (row, col) = (d / cfg.grid, d % cfg.grid);
            let lon = 10.0 * ci as f64 + (col as f64 + rng.random_range(0.05..0.95)) * CELL;
            let lat = CITY_LAT + (row as f64 + rng.random_range(0.05..0.95)) * CELL;
            let since = start + Duration::days(h as i64 * join_span / cfg.hosts_per_city as i64);
            let room_type = if rng.random::<f64>() < cfg.room_share {
                if rng.random::<f64>() < 0.8 {
                    RoomType::PrivateRoom
                } else {
                    RoomType::SharedRoom
                }
            } else {
                RoomType::EntireHome
            };
            market.listing_district.insert(listing_id.clone(), format!("{city}-d{d}"));

            let mut social_factor = factor(d);
            if room_type != RoomType::EntireHome {
                social_factor *= cfg.room_social_factor;
            }
            if h < innovators {
                social_factor *= cfg.innovator_social_factor;
            }
            let days = (end - since).num_days().max(0);
            let n_reviews = rng.random_range(cfg.reviews_per_listing.0..=cfg.reviews_per_listing.1);
            for _ in 0..n_reviews {
                let date = since + Duration::days(rng.random_range(0..=days));
                let t = (date.year() - cfg.first_year) as f64;
                let pb = (cfg.business_rate + cfg.business_slope * t).clamp(0.0, 1.0);
                let ps = (cfg.social_rate + cfg.social_slope * t).clamp(0.0, 1.0);
                let (pb, ps) = inject_social(pb, ps, social_factor);
                let n = rng.random_range(cfg.words_per_review.0..=cfg.words_per_review.1);
                let words = vocab.mix(&mut rng, n, pb, ps);
                reviewer += 1;
                market.reviews.push(Review::new(
                    (market.reviews.len() + 1).to_string(),
                    listing_id.clone(),
                    reviewer.to_string(),
                    Some(date),
                    sentence_text(&words),
                    city.clone(),
                ));
                if cfg.noise_rate > 0.0 && rng.random::<f64>() < cfg.noise_rate {
                    reviewer += 1;
                    let (text, date) = match rng.random_range(0..3) {
                        0 => (CANCELLATION.to_owned(), Some(date)),
                        1 => (FOREIGN.to_owned(), Some(date)),
                        _ => (sentence_text(&words), None),
                    };
                    market.reviews.push(Review::new(
                        (market.reviews.len() + 1).to_string(),
                        listing_id.clone(),
                        reviewer.to_string(),
                        date,
                        text,
                        city.clone(),
                    ));
                }
            }
            market.listings.push(Listing {
                listing_id,
                host_id: format!("h{}", ci * 1_000_000 + h + 1),
                room_type,
                latitude: Some(lat),
                longitude: Some(lon),
                city: city.clone(),
                host_since: Some(since),
            });
        }
    }
    Ok(market)
}

/// Parameters of a labeled-sentence set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabeledConfig {
    pub n_sentences: usize,
    pub n_annotators: u32,
    pub words_per_sentence: (usize, usize),
    /// Rate of words from the sentence's own theme.
    pub theme_rate: f64,
    /// Rate of words from the other level-1 category.
    pub cross_rate: f64,
    pub seed: u64,
}

impl Default for LabeledConfig {
    fn default() -> Self {
        LabeledConfig {
            n_sentences: 200,
            n_annotators: 4,
            words_per_sentence: (8, 20),
            theme_rate: 0.25,
            cross_rate: 0.05,
            seed: 11,
        }
    }
}

/// Sentences about one level-2 theme each, voted by annotators that agree
/// on the true theme (all or all but one) and stray onto another theme at
/// most once. Returns the sentences and the theme labels.
pub fn generate_labeled(cfg: &LabeledConfig, dict: &Dictionary) -> Result<(Vec<LabeledSentence>, Vec<String>)> {
    if cfg.n_annotators < 4 {
        return Err(Error::config("labeled generator needs at least 4 annotators"));
    }
    let (lo, hi) = cfg.words_per_sentence;
    if lo == 0 || lo > hi {
        return Err(Error::config("empty words_per_sentence range"));
    }
    let vocab = Vocabulary::from_dictionary(dict)?;
    let themes: Vec<String> = vocab.themes.keys().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.n_sentences);
    for i in 0..cfg.n_sentences {
        let t = i % themes.len();
        let under = dict.level3_under(&Category::new(Tier::Level2, &themes[t]))?;
        let focus = under[rng.random_range(0..under.len())];
        let own: Vec<String> = dict
            .words_in(&Category::new(Tier::Level3, focus))?
            .into_iter()
            .map(str::to_owned)
            .collect();
        let is_social = dict.parent(&Category::new(Tier::Level2, &themes[t])).is_some_and(|p| p.label == SOCIAL);
        let cross = if is_social { &vocab.business } else { &vocab.social };
        let n = rng.random_range(lo..=hi);
        let words: Vec<String> = (0..n)
            .map(|_| {
                let u = rng.random::<f64>();
                if u < cfg.theme_rate {
                    own.choose(&mut rng).expect("non-empty").clone()
                } else if u < cfg.theme_rate + cfg.cross_rate {
                    cross.choose(&mut rng).expect("non-empty").clone()
                } else {
                    vocab.filler(&mut rng).to_owned()
                }
            })
            .collect();
        let mut votes: BTreeMap<String, u32> = themes.iter().map(|th| (th.clone(), 0)).collect();
        let agree = cfg.n_annotators - rng.random_range(0..=1u32);
        votes.insert(themes[t].clone(), agree);
        if agree < cfg.n_annotators {
            let other = (t + rng.random_range(1..themes.len())) % themes.len();
            votes.insert(themes[other].clone(), 1);
        }
        out.push(LabeledSentence::new(
            format!("s{:04}", i + 1),
            sentence_text(&words),
            cfg.n_annotators,
            votes,
        )?);
    }
    Ok((out, themes))
}

/// Parameters of a two-topic corpus for embedding checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicConfig {
    pub words_per_topic: usize,
    pub n_sentences: usize,
    pub sentence_len: usize,
    /// Rate of shared function words.
    pub filler_rate: f64,
    pub seed: u64,
}

impl Default for TopicConfig {
    fn default() -> Self {
        TopicConfig {
            words_per_topic: 20,
            n_sentences: 3000,
            sentence_len: 12,
            filler_rate: 0.3,
            seed: 5,
        }
    }
}

/// Sentences drawn from one of two disjoint topic vocabularies plus shared
/// filler. Returns the sentences and the two vocabularies.
pub fn generate_topics(cfg: &TopicConfig) -> (Vec<Vec<String>>, [Vec<String>; 2]) {
    let topics = [
        (0..cfg.words_per_topic).map(pseudo_word).collect::<Vec<_>>(),
        (0..cfg.words_per_topic).map(|i| pseudo_word(1000 + i)).collect::<Vec<_>>(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let corpus = (0..cfg.n_sentences)
        .map(|i| {
            let topic = &topics[i % 2];
            (0..cfg.sentence_len)
                .map(|_| {
                    if rng.random::<f64>() < cfg.filler_rate {
                        (*FUNCTION_FILLER.choose(&mut rng).expect("non-empty")).to_owned()
                    } else {
                        topic.choose(&mut rng).expect("non-empty").clone()
                    }
                })
                .collect()
        })
        .collect();
    (corpus, topics)
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map_err(|e| Error::io(path, e))
}

/// Write reviews in the layout of an Inside Airbnb reviews file.
pub fn write_reviews_csv(path: impl AsRef<Path>, reviews: &[Review]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    let row = |w: &mut csv::Writer<File>, r: [&str; 6]| w.write_record(r).map_err(|e| Error::csv(path, e));
    row(&mut w, ["listing_id", "id", "date", "reviewer_id", "reviewer_name", "comments"])?;
    for r in reviews {
        let date = r.date.map(|d| d.to_string()).unwrap_or_default();
        row(&mut w, [&r.listing_id, &r.review_id, &date, &r.reviewer_id, "guest", &r.raw_text])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write listings in the layout of an Inside Airbnb listings file.
pub fn write_listings_csv(path: impl AsRef<Path>, listings: &[Listing]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    let row = |w: &mut csv::Writer<File>, r: [&str; 6]| w.write_record(r).map_err(|e| Error::csv(path, e));
    row(&mut w, ["id", "host_id", "host_since", "room_type", "latitude", "longitude"])?;
    for l in listings {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        let since = l.host_since.map(|d| d.to_string()).unwrap_or_default();
        row(
            &mut w,
            [&l.listing_id, &l.host_id, &since, l.room_type.label(), &opt(l.latitude), &opt(l.longitude)],
        )?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_labeled_csv(path: impl AsRef<Path>, sentences: &[LabeledSentence], themes: &[String]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["sentence_id".to_owned(), "text".into(), "n_annotators".into()];
    header.extend(themes.iter().cloned());
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for s in sentences {
        let mut rec = vec![s.sentence_id.clone(), s.text.clone(), s.n_annotators.to_string()];
        rec.extend(themes.iter().map(|t| s.votes_for(t).to_string()));
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Districts as a GeoJSON FeatureCollection with a `district_id` property.
pub fn districts_geojson(districts: &[District]) -> String {
    let ring = |r: &Vec<(f64, f64)>| r.iter().map(|(x, y)| vec![*x, *y]).collect::<Vec<_>>();
    let features: Vec<serde_json::Value> = districts
        .iter()
        .map(|d| {
            let polys: Vec<_> = d
                .polygons
                .iter()
                .map(|p| std::iter::once(ring(&p.outer)).chain(p.holes.iter().map(ring)).collect::<Vec<_>>())
                .collect();
            serde_json::json!({
                "type": "Feature",
                "properties": { "district_id": d.district_id },
                "geometry": { "type": "MultiPolygon", "coordinates": polys },
            })
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({ "type": "FeatureCollection", "features": features }))
        .expect("serialisable")
}

/// Write one reviews, listings and districts file per city into `dir`.
pub fn write_market(dir: impl AsRef<Path>, market: &Market) -> Result<()> {
    let dir = dir.as_ref();
    let mut cities: Vec<&str> = market.listings.iter().map(|l| l.city.as_str()).collect();
    cities.dedup();
    for city in cities {
        let rs: Vec<Review> = market.reviews.iter().filter(|r| r.city == city).cloned().collect();
        let ls: Vec<Listing> = market.listings.iter().filter(|l| l.city == city).cloned().collect();
        let ds: Vec<District> = market.districts.iter().filter(|d| d.city == city).cloned().collect();
        write_reviews_csv(dir.join(format!("{city}_reviews.csv")), &rs)?;
        write_listings_csv(dir.join(format!("{city}_listings.csv")), &ls)?;
        let path = dir.join(format!("{city}_districts.geojson"));
        create(&path)?
            .write_all(districts_geojson(&ds).as_bytes())
            .map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Write a complete runnable project into `dir`: the market files,
/// `labeled.csv` and a `config.toml` pointing at them. Returns the config
/// with paths resolved against `dir`.
pub fn write_fixture(
    dir: impl AsRef<Path>,
    market: &MarketConfig,
    labeled: &LabeledConfig,
    dict: &Dictionary,
) -> Result<RunConfig> {
    let dir = dir.as_ref();
    let m = generate_market(market, dict)?;
    write_market(dir, &m)?;
    let (sentences, themes) = generate_labeled(labeled, dict)?;
    write_labeled_csv(dir.join("labeled.csv"), &sentences, &themes)?;

    let mut cfg = RunConfig {
        seed: market.seed,
        out: "out".into(),
        ..Default::default()
    };
    cfg.inputs.labeled = Some("labeled.csv".into());
    // small corpora need more passes before vectors separate
    cfg.embedding.epochs = 20;
    let (a, b) = (market.first_year, market.last_year);
    cfg.analysis.early = YearRange::new(a, (a + 2).min(b));
    cfg.analysis.late = YearRange::new((b - 2).max(a), b);
    for c in &market.cities {
        cfg.inputs.cities.push(CityInput {
            name: c.clone(),
            reviews: format!("{c}_reviews.csv").into(),
            listings: Some(format!("{c}_listings.csv").into()),
            districts: Some(format!("{c}_districts.geojson").into()),
        });
    }
    let path = dir.join("config.toml");
    create(&path)?
        .write_all(cfg.to_toml().as_bytes())
        .map_err(|e| Error::io(&path, e))?;
    cfg.resolve_paths(dir);
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::parse_geojson;

    #[test]
    fn pseudo_words_are_distinct_and_alphabetic() {
        let ws: std::collections::BTreeSet<String> = (0..5000).map(pseudo_word).collect();
        assert_eq!(ws.len(), 5000);
        assert!(ws.iter().all(|w| w.chars().all(|c| c.is_ascii_lowercase())));
    }

    #[test]
    fn market_is_reproducible() {
        let dict = Dictionary::reference();
        let cfg = MarketConfig {
            hosts_per_city: 20,
            ..Default::default()
        };
        let a = generate_market(&cfg, &dict).unwrap();
        assert_eq!(a, generate_market(&cfg, &dict).unwrap());
        assert_eq!(a.listings.len(), 40);
        assert_eq!(a.districts.len(), 18);
        for l in &a.listings {
            let (lat, lon) = l.coordinates().unwrap();
            let ds: Vec<District> = a.districts.iter().filter(|d| d.city == l.city).cloned().collect();
            assert_eq!(
                crate::analysis::point_in_district(lat, lon, &ds),
                Some(a.listing_district[&l.listing_id].as_str())
            );
        }
        let geo = districts_geojson(&a.districts);
        assert_eq!(parse_geojson(&geo, "district_id", "x").unwrap().len(), 18);
    }

    #[test]
    fn labeled_votes_agree() {
        let dict = Dictionary::reference();
        let (ss, themes) = generate_labeled(&LabeledConfig::default(), &dict).unwrap();
        assert_eq!(ss.len(), 200);
        assert_eq!(themes.len(), 4);
        for (i, s) in ss.iter().enumerate() {
            assert!(s.agrees_on(&themes[i % 4]));
        }
    }
}
