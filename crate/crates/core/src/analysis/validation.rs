use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::induction::LabeledSentence;
use crate::metrics::{set_adoption, AdoptionValue};
use crate::taxonomy::{Category, Dictionary, Tier, BUSINESS, SOCIAL};

/// Adoption of both level-1 categories on the business and social sets of
/// labeled sentences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledSetAdoption {
    pub business_on_business: AdoptionValue,
    pub business_on_social: AdoptionValue,
    pub social_on_business: AdoptionValue,
    pub social_on_social: AdoptionValue,
    pub n_business: usize,
    pub n_social: usize,
}

impl LabeledSetAdoption {
    /// `(category, set, value)` rows in table order.
    pub fn rows(&self) -> [(&'static str, &'static str, &AdoptionValue); 4] {
        [
            (BUSINESS, BUSINESS, &self.business_on_business),
            (BUSINESS, SOCIAL, &self.business_on_social),
            (SOCIAL, BUSINESS, &self.social_on_business),
            (SOCIAL, SOCIAL, &self.social_on_social),
        ]
    }
}

fn theme_level1(dict: &Dictionary, theme: &str) -> Option<String> {
    let l2 = Category::new(Tier::Level2, theme);
    if dict.has_category(&l2) {
        return dict.parent(&l2).map(|c| c.label);
    }
    dict.has_category(&Category::level1(theme)).then(|| theme.to_owned())
}

/// Split sentences into the business and social sets by annotator agreement
/// on the themes under each level-1 category. A sentence agreed on themes of
/// both kinds lands in both sets.
pub fn labeled_sets<'s>(
    sentences: &'s [LabeledSentence],
    themes: &[String],
    dict: &Dictionary,
) -> Result<(Vec<&'s LabeledSentence>, Vec<&'s LabeledSentence>)> {
    let mut kind: BTreeMap<&str, String> = BTreeMap::new();
    for t in themes {
        let l1 = theme_level1(dict, t)
            .ok_or_else(|| Error::config(format!("theme `{t}` is not a level-1 or level-2 category")))?;
        kind.insert(t, l1);
    }
    let in_set = |s: &LabeledSentence, l1: &str| kind.iter().any(|(t, k)| k == l1 && s.agrees_on(t));
    Ok((
        sentences.iter().filter(|s| in_set(s, BUSINESS)).collect(),
        sentences.iter().filter(|s| in_set(s, SOCIAL)).collect(),
    ))
}

/// Business and social adoption on the labeled business and social sets.
pub fn labeled_set_adoption(
    sentences: &[LabeledSentence],
    themes: &[String],
    dict: &Dictionary,
) -> Result<LabeledSetAdoption> {
    let (b, s) = labeled_sets(sentences, themes, dict)?;
    if b.is_empty() || s.is_empty() {
        return Err(Error::Data(format!(
            "labeled sets need sentences of both kinds ({} business, {} social)",
            b.len(),
            s.len()
        )));
    }
    let (cb, cs) = (Category::level1(BUSINESS), Category::level1(SOCIAL));
    Ok(LabeledSetAdoption {
        business_on_business: set_adoption(&cb, &b, dict)?,
        business_on_social: set_adoption(&cb, &s, dict)?,
        social_on_business: set_adoption(&cs, &b, dict)?,
        social_on_social: set_adoption(&cs, &s, dict)?,
        n_business: b.len(),
        n_social: s.len(),
    })
}

/// A copy of `dict` keeping, under each level-1 category, only the `n`
/// words most frequent in `docs` (ties by word).
pub fn top_n_dictionary<D: AsRef<[String]>>(dict: &Dictionary, docs: &[D], n: usize) -> Result<Dictionary> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for d in docs {
        for t in d.as_ref() {
            if dict.contains(t) {
                *counts.entry(t.as_str()).or_default() += 1;
            }
        }
    }
    let mut keep: BTreeMap<String, String> = BTreeMap::new();
    for l1 in dict.level1() {
        let mut ws: Vec<(&str, &str)> = dict.words().filter(|(w, _)| dict.level1_of(w) == Some(l1)).collect();
        ws.sort_by_key(|(w, _)| (std::cmp::Reverse(counts.get(w).copied().unwrap_or(0)), *w));
        keep.extend(ws.into_iter().take(n).map(|(w, c)| (w.to_owned(), c.to_owned())));
    }
    Dictionary::new(
        dict.level1().map(str::to_owned).collect::<BTreeSet<_>>(),
        dict.level2().map(|(a, b)| (a.to_owned(), b.to_owned())).collect(),
        dict.level3().map(|(a, b)| (a.to_owned(), b.to_owned())).collect(),
        keep,
    )
}
