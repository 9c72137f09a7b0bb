use std::collections::{BTreeMap, BTreeSet};

use super::dictionary::{Dictionary, BUSINESS, SOCIAL};
use crate::error::{Error, Result};

/// Name given to the `i`-th (1-based) cluster of a theme split into `k`.
pub fn default_cluster_name(theme: &str, k: usize, i: usize) -> String {
    format!("{theme}-k{k}#{i}")
}

/// The fixed theme to level-1 mapping.
pub fn default_level2_map() -> BTreeMap<String, String> {
    [
        ("property", BUSINESS),
        ("location", BUSINESS),
        ("professional_conduct", BUSINESS),
        ("social_interaction", SOCIAL),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_owned(), b.to_owned()))
    .collect()
}

/// Assemble a dictionary from per-theme word clusters.
///
/// `names` maps default cluster names (see [`default_cluster_name`]) to
/// operator-chosen labels; unmapped clusters keep the default.
pub fn build_dictionary(
    theme_clusters: &BTreeMap<String, Vec<Vec<String>>>,
    level2_to_level1: &BTreeMap<String, String>,
    names: &BTreeMap<String, String>,
) -> Result<Dictionary> {
    let mut level1 = BTreeSet::new();
    let mut level2 = BTreeMap::new();
    let mut level3 = BTreeMap::new();
    let mut words: BTreeMap<String, String> = BTreeMap::new();

    for (theme, clusters) in theme_clusters {
        let parent = level2_to_level1
            .get(theme)
            .ok_or_else(|| Error::config(format!("theme `{theme}` has no level-1 parent")))?;
        level1.insert(parent.clone());
        level2.insert(theme.clone(), parent.clone());
        let k = clusters.len();
        for (i, cluster) in clusters.iter().enumerate() {
            let default = default_cluster_name(theme, k, i + 1);
            let label = names.get(&default).cloned().unwrap_or(default);
            if level3.insert(label.clone(), theme.clone()).is_some() {
                return Err(Error::config(format!("category name `{label}` used twice")));
            }
            for w in cluster {
                if let Some(prev) = words.insert(w.clone(), label.clone()) {
                    return Err(Error::Data(format!(
                        "word `{w}` appears in both `{prev}` and `{label}`"
                    )));
                }
            }
        }
    }
    Dictionary::new(level1, level2, level3, words)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clusters(spec: &[(&str, &[&[&str]])]) -> BTreeMap<String, Vec<Vec<String>>> {
        spec.iter()
            .map(|(t, cs)| {
                (
                    t.to_string(),
                    cs.iter().map(|c| c.iter().map(|w| w.to_string()).collect()).collect(),
                )
            })
            .collect()
    }

    #[test]
    fn minimal() {
        let tc = clusters(&[("location", &[&["quiet", "area", "walk"]])]);
        let d = build_dictionary(&tc, &default_level2_map(), &BTreeMap::new()).unwrap();
        assert_eq!(d.category_counts(), (1, 1, 1));
        assert_eq!(d.word_count(), 3);
        assert_eq!(d.path_of("walk").unwrap().level3, "location-k1#1");
        assert_eq!(d.level1_of("walk"), Some(BUSINESS));
    }

    #[test]
    fn named_clusters() {
        let tc = clusters(&[("social_interaction", &[&["chat"], &["dinner", "wine"]])]);
        let names = BTreeMap::from([("social_interaction-k2#2".to_string(), "meals".to_string())]);
        let d = build_dictionary(&tc, &default_level2_map(), &names).unwrap();
        assert_eq!(d.path_of("wine").unwrap().level3, "meals");
        assert_eq!(d.level1_of("chat"), Some(SOCIAL));
    }

    #[test]
    fn duplicate_word_named() {
        let tc = clusters(&[("property", &[&["bed"]]), ("location", &[&["bed"]])]);
        let err = build_dictionary(&tc, &default_level2_map(), &BTreeMap::new()).unwrap_err();
        assert!(err.to_string().contains("`bed`"));
    }

    #[test]
    fn unknown_theme() {
        let tc = clusters(&[("weather", &[&["rain"]])]);
        assert!(matches!(
            build_dictionary(&tc, &default_level2_map(), &BTreeMap::new()),
            Err(Error::Config(_))
        ));
    }
}
