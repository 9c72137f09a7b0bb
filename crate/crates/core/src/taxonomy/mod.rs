//! Clustering expanded lexicons into level-3 categories and assembling the
//! dictionary.

mod build;
mod dictionary;
mod elbow;
mod kmeans;

pub use build::{build_dictionary, default_cluster_name, default_level2_map};
pub use dictionary::{
    load_dictionary, parse_dictionary, serialize_dictionary, Category, Dictionary, DictionaryIndex, Tier,
    WordPath, BUSINESS, SOCIAL,
};
pub use elbow::{chord_elbow, elbow_select, ElbowCurve};
pub use kmeans::{kmeans, lloyd, KMeansResult, MAX_ITERATIONS};
