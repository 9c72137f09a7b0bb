use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::EmbeddingModel;
use crate::error::{Error, Result};
use crate::induction::{Lexicon, LexiconEntry, Origin};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpansionConfig {
    pub th_cos: f64,
    /// Cap on neighbours taken per seed word; `None` is unlimited.
    pub max_neighbors: Option<usize>,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            th_cos: 0.7,
            max_neighbors: None,
        }
    }
}

impl ExpansionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.th_cos > 0.0 && self.th_cos <= 1.0) {
            return Err(Error::config(format!("th_cos must lie in (0, 1], got {}", self.th_cos)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExpansionReport {
    /// Seed words with no vector, as `(word, theme)`.
    pub oov_seed_words: Vec<(String, String)>,
    /// Words added per theme.
    pub added: BTreeMap<String, usize>,
}

/// Add embedding neighbours of seed words to the seed's theme.
///
/// A candidate near seeds of several themes joins the theme of its most
/// similar seed word (ties go to the alphabetically first seed word).
pub fn expand_lexicon(seed: &Lexicon, model: &EmbeddingModel, config: &ExpansionConfig) -> Result<(Lexicon, ExpansionReport)> {
    config.validate()?;
    let mut report = ExpansionReport::default();
    let mut seeds: Vec<(&str, &str, usize)> = Vec::new();
    for (w, e) in &seed.entries {
        match model.id(w) {
            Some(i) => seeds.push((w, &e.theme, i)),
            None => report.oov_seed_words.push((w.clone(), e.theme.clone())),
        }
    }
    if !report.oov_seed_words.is_empty() {
        log::warn!("{} seed words have no vector", report.oov_seed_words.len());
    }

    let rows = model.normalised_rows();
    let per_seed: Vec<Vec<(usize, f64)>> = par::map(&seeds, |&(_, _, si)| {
        let s = &rows[si];
        let mut hits: Vec<(usize, f64)> = rows
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != si && !seed.contains(&model.words()[j]))
            .filter_map(|(j, r)| {
                let c: f64 = s.iter().zip(r).map(|(a, b)| a * b).sum();
                (c >= config.th_cos).then_some((j, c))
            })
            .collect();
        if let Some(cap) = config.max_neighbors {
            hits.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            hits.truncate(cap);
        }
        hits
    });

    // seeds are in word order, so strict > keeps the first seed on ties
    let mut best: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (k, hits) in per_seed.iter().enumerate() {
        for &(j, c) in hits {
            match best.get(&j) {
                Some(&(prev, _)) if c <= prev => {}
                _ => {
                    best.insert(j, (c, k));
                }
            }
        }
    }

    let mut out = seed.clone();
    for (j, (c, k)) in best {
        let (sw, theme, _) = seeds[k];
        out.insert(
            model.words()[j].clone(),
            LexiconEntry {
                theme: theme.to_owned(),
                origin: Origin::Expanded {
                    neighbor_of: sw.to_owned(),
                    cosine: c,
                },
            },
        )?;
        *report.added.entry(theme.to_owned()).or_default() += 1;
    }
    Ok((out, report))
}
