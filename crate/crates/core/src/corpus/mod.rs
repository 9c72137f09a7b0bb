//! Review and listing ingestion, cleaning and binning.

mod bin;
mod filter;
mod ingest;
mod language;
mod tokenize;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

pub use bin::{bin_reviews, BinContext, BinKey, Dimension, HostKey, LengthBuckets};
pub use filter::{filter_corpus, DropReason, FilterConfig, FilterReport};
pub use ingest::{
    ingest_listings, ingest_reviews, read_cleaned_corpus, write_cleaned_corpus, IngestReport,
    ListingReport,
};
pub use language::{detect_language, is_function_word, Language, DEFAULT_LANGUAGE_THRESHOLD};
pub use tokenize::{split_sentences, tokenize};

use crate::error::{Error, Result};

/// One cleaned guest review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: String,
    pub listing_id: String,
    pub reviewer_id: String,
    pub date: Option<NaiveDate>,
    pub raw_text: String,
    pub tokens: Vec<String>,
    pub city: String,
    pub word_count: usize,
    /// Pre-tagged language, overriding the detector when present.
    pub language: Option<String>,
}

impl Review {
    /// Build a review from raw text, tokenizing it.
    pub fn new(
        review_id: impl Into<String>,
        listing_id: impl Into<String>,
        reviewer_id: impl Into<String>,
        date: Option<NaiveDate>,
        raw_text: impl Into<String>,
        city: impl Into<String>,
    ) -> Self {
        let raw_text = raw_text.into();
        let tokens = tokenize(&raw_text);
        Self::from_tokens(review_id, listing_id, reviewer_id, date, raw_text, tokens, city)
    }

    pub fn from_tokens(
        review_id: impl Into<String>,
        listing_id: impl Into<String>,
        reviewer_id: impl Into<String>,
        date: Option<NaiveDate>,
        raw_text: impl Into<String>,
        tokens: Vec<String>,
        city: impl Into<String>,
    ) -> Self {
        Review {
            review_id: review_id.into(),
            listing_id: listing_id.into(),
            reviewer_id: reviewer_id.into(),
            date,
            raw_text: raw_text.into(),
            word_count: tokens.len(),
            tokens,
            city: city.into(),
            language: None,
        }
    }

    pub fn year(&self) -> Option<i32> {
        self.date.map(|d| d.year())
    }
}

impl AsRef<[String]> for Review {
    fn as_ref(&self) -> &[String] {
        &self.tokens
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RoomType {
    EntireHome,
    PrivateRoom,
    SharedRoom,
}

impl RoomType {
    pub const ALL: [RoomType; 3] = [RoomType::EntireHome, RoomType::PrivateRoom, RoomType::SharedRoom];

    /// The label used in listing files.
    pub fn label(self) -> &'static str {
        match self {
            RoomType::EntireHome => "Entire home/apt",
            RoomType::PrivateRoom => "Private room",
            RoomType::SharedRoom => "Shared room",
        }
    }
}

impl fmt::Display for RoomType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for RoomType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "entire home/apt" | "entire_home" => Ok(RoomType::EntireHome),
            "private room" | "private_room" => Ok(RoomType::PrivateRoom),
            "shared room" | "shared_room" => Ok(RoomType::SharedRoom),
            other => Err(Error::Data(format!("unknown room type `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Listing {
    pub listing_id: String,
    pub host_id: String,
    pub room_type: RoomType,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub city: String,
    pub host_since: Option<NaiveDate>,
}

impl Listing {
    pub fn coordinates(&self) -> Option<(f64, f64)> {
        self.latitude.zip(self.longitude)
    }
}

/// Listings keyed by listing id.
pub type ListingIndex = HashMap<String, Listing>;

pub fn index_listings(listings: impl IntoIterator<Item = Listing>) -> ListingIndex {
    listings.into_iter().map(|l| (l.listing_id.clone(), l)).collect()
}

/// Host segment by platform-join quantile within a city.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HostSegment {
    Innovator,
    EarlyAdopter,
    EarlyMajority,
}

impl HostSegment {
    pub const ALL: [HostSegment; 3] = [
        HostSegment::Innovator,
        HostSegment::EarlyAdopter,
        HostSegment::EarlyMajority,
    ];

    pub fn label(self) -> &'static str {
        match self {
            HostSegment::Innovator => "innovator",
            HostSegment::EarlyAdopter => "early_adopter",
            HostSegment::EarlyMajority => "early_majority",
        }
    }
}

impl fmt::Display for HostSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub(crate) fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}
