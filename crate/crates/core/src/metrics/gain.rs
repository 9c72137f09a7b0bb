use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::adoption::log_tf;
use crate::error::{Error, Result};
use crate::par;
use crate::taxonomy::Dictionary;

/// Default floor on a word's normalised tf over the union of both sets.
pub const DEFAULT_MIN_TOTAL_TF: f64 = 1e-5;

const COUNT_CHUNK: usize = 4096;

/// Total occurrences of each word across a set of documents.
pub fn word_counts<D>(docs: &[D]) -> BTreeMap<String, u64>
where
    D: AsRef<[String]> + Sync,
{
    let parts = par::map_chunks(docs, COUNT_CHUNK, |chunk| {
        let mut m: HashMap<&str, u64> = HashMap::new();
        for d in chunk {
            for t in d.as_ref() {
                *m.entry(t.as_str()).or_default() += 1;
            }
        }
        m.into_iter().map(|(k, v)| (k.to_owned(), v)).collect::<Vec<_>>()
    });
    let mut out = BTreeMap::new();
    for part in parts {
        for (w, c) in part {
            *out.entry(w).or_default() += c;
        }
    }
    out
}

/// Normalise log-scaled counts so they sum to 1.
pub fn normalised_tf(counts: &BTreeMap<String, u64>) -> BTreeMap<String, f64> {
    let scaled: Vec<(&String, f64)> = counts.iter().map(|(w, &c)| (w, log_tf(c))).collect();
    let total: f64 = scaled.iter().map(|(_, t)| t).sum();
    scaled
        .into_iter()
        .map(|(w, t)| (w.clone(), if total > 0.0 { t / total } else { 0.0 }))
        .collect()
}

/// Normalised log-scaled term frequency of every word in a set.
pub fn set_term_frequencies<D>(docs: &[D]) -> Result<BTreeMap<String, f64>>
where
    D: AsRef<[String]> + Sync,
{
    if docs.is_empty() {
        return Err(Error::arith("term frequencies of an empty review set"));
    }
    Ok(normalised_tf(&word_counts(docs)))
}

/// Normalised log-scaled term frequency of one word in a set.
pub fn set_tf<D>(word: &str, docs: &[D]) -> Result<f64>
where
    D: AsRef<[String]> + Sync,
{
    Ok(set_term_frequencies(docs)?.get(word).copied().unwrap_or(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GainStatus {
    Both,
    OnlyA,
    OnlyB,
}

impl GainStatus {
    pub fn label(self) -> &'static str {
        match self {
            GainStatus::Both => "BOTH",
            GainStatus::OnlyA => "ONLY_A",
            GainStatus::OnlyB => "ONLY_B",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainEntry {
    pub word: String,
    pub tf_a: f64,
    pub tf_b: f64,
    /// `tf_a / tf_b`; set only for [`GainStatus::Both`].
    pub gain: Option<f64>,
    pub status: GainStatus,
}

/// Term-frequency gain of A over B for every word whose normalised tf over
/// the union of both sets reaches `min_total_tf`.
///
/// Entries present in both sets come first by decreasing gain, then words
/// only in A, then words only in B; ties are broken by word.
pub fn tf_gain<D>(a: &[D], b: &[D], min_total_tf: f64) -> Result<Vec<GainEntry>>
where
    D: AsRef<[String]> + Sync,
{
    if a.is_empty() || b.is_empty() {
        return Err(Error::arith("tf gain needs two non-empty review sets"));
    }
    let ca = word_counts(a);
    let cb = word_counts(b);
    let mut union = ca.clone();
    for (w, c) in &cb {
        *union.entry(w.clone()).or_default() += c;
    }
    let tu = normalised_tf(&union);
    let ta = normalised_tf(&ca);
    let tb = normalised_tf(&cb);

    let mut out: Vec<GainEntry> = tu
        .iter()
        .filter(|(_, &t)| t >= min_total_tf)
        .map(|(w, _)| {
            let fa = ta.get(w).copied().unwrap_or(0.0);
            let fb = tb.get(w).copied().unwrap_or(0.0);
            let (status, gain) = match (fa > 0.0, fb > 0.0) {
                (true, true) => (GainStatus::Both, Some(fa / fb)),
                (true, false) => (GainStatus::OnlyA, None),
                _ => (GainStatus::OnlyB, None),
            };
            GainEntry {
                word: w.clone(),
                tf_a: fa,
                tf_b: fb,
                gain,
                status,
            }
        })
        .collect();
    out.sort_by(|x, y| {
        x.status
            .cmp(&y.status)
            .then_with(|| match (x.gain, y.gain) {
                (Some(gx), Some(gy)) => gy.total_cmp(&gx),
                _ => std::cmp::Ordering::Equal,
            })
            .then_with(|| x.word.cmp(&y.word))
    });
    Ok(out)
}

/// A dictionary word's gain with its category path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotatedGain {
    pub word: String,
    pub level1: String,
    pub level2: String,
    pub level3: String,
    pub tf_a: f64,
    pub tf_b: f64,
    pub gain: f64,
}

/// Share of a level-1 category's words whose log10 gain falls in one bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityBin {
    pub level1: String,
    pub log10_gain_lo: f64,
    pub log10_gain_hi: f64,
    pub share: f64,
    pub n_words: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainReport {
    pub densities: Vec<DensityBin>,
    /// Highest gains first.
    pub top: Vec<AnnotatedGain>,
    /// Lowest gains first.
    pub bottom: Vec<AnnotatedGain>,
}

pub const DENSITY_BINS: usize = 20;

/// Per-level-1 gain distributions and the extreme dictionary words.
pub fn gain_report(entries: &[GainEntry], dict: &Dictionary, top_k: usize) -> GainReport {
    let mut words: Vec<AnnotatedGain> = entries
        .iter()
        .filter_map(|e| {
            let gain = e.gain?;
            let p = dict.path_of(&e.word)?;
            Some(AnnotatedGain {
                word: e.word.clone(),
                level1: p.level1.to_owned(),
                level2: p.level2.to_owned(),
                level3: p.level3.to_owned(),
                tf_a: e.tf_a,
                tf_b: e.tf_b,
                gain,
            })
        })
        .collect();
    words.sort_by(|x, y| y.gain.total_cmp(&x.gain).then_with(|| x.word.cmp(&y.word)));

    let k = top_k.min(words.len());
    let top = words[..k].to_vec();
    let bottom = words[words.len() - k..].iter().rev().cloned().collect();

    let logs: Vec<f64> = words.iter().map(|w| w.gain.log10()).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut densities = Vec::new();
    if !words.is_empty() {
        let nbins = if hi > lo { DENSITY_BINS } else { 1 };
        let width = (hi - lo) / nbins as f64;
        for l1 in dict.level1() {
            let mine: Vec<f64> = words
                .iter()
                .zip(&logs)
                .filter(|(w, _)| w.level1 == l1)
                .map(|(_, &g)| g)
                .collect();
            let mut counts = vec![0usize; nbins];
            for g in &mine {
                let i = if width > 0.0 {
                    (((g - lo) / width) as usize).min(nbins - 1)
                } else {
                    0
                };
                counts[i] += 1;
            }
            for (i, c) in counts.into_iter().enumerate() {
                densities.push(DensityBin {
                    level1: l1.to_owned(),
                    log10_gain_lo: lo + width * i as f64,
                    log10_gain_hi: if i + 1 == nbins { hi } else { lo + width * (i + 1) as f64 },
                    share: if mine.is_empty() { 0.0 } else { c as f64 / mine.len() as f64 },
                    n_words: c,
                });
            }
        }
    }
    GainReport { densities, top, bottom }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use approx::assert_abs_diff_eq;

    fn docs(texts: &[&str]) -> Vec<Vec<String>> {
        texts.iter().map(|t| tokenize(t)).collect()
    }

    #[test]
    fn set_tf_examples() {
        let a = docs(&["great location", "location"]);
        assert_abs_diff_eq!(set_tf("location", &a).unwrap(), 0.6287, epsilon = 1e-3);
        assert_eq!(set_tf("pool", &a).unwrap(), 0.0);
        assert_eq!(set_tf("x", &docs(&["x x x"])).unwrap(), 1.0);
        let empty: Vec<Vec<String>> = vec![];
        assert!(set_tf("x", &empty).is_err());
    }

    #[test]
    fn gain_example() {
        let a = docs(&["great location location"]);
        let b = docs(&["great host"]);
        let g = tf_gain(&a, &b, DEFAULT_MIN_TOTAL_TF).unwrap();
        let great = g.iter().find(|e| e.word == "great").unwrap();
        assert_abs_diff_eq!(great.gain.unwrap(), 0.743, epsilon = 1e-3);
        let loc = g.iter().find(|e| e.word == "location").unwrap();
        assert_eq!(loc.status, GainStatus::OnlyA);
        assert_eq!(loc.gain, None);
        assert_eq!(g.last().unwrap().status, GainStatus::OnlyB);
    }

    #[test]
    fn identical_sets() {
        let a = docs(&["a b b c", "c d"]);
        for e in tf_gain(&a, &a, 0.0).unwrap() {
            assert_eq!(e.status, GainStatus::Both);
            assert_abs_diff_eq!(e.gain.unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn report_clamps_and_annotates() {
        let dict = crate::taxonomy::Dictionary::reference();
        let a = docs(&["quiet area friendly host", "walk"]);
        let b = docs(&["quiet quiet area friendly", "walk walk"]);
        let g = tf_gain(&a, &b, 0.0).unwrap();
        let r = gain_report(&g, &dict, 100);
        let n = r.top.len();
        assert_eq!(n, r.bottom.len());
        assert!(n >= 3);
        assert!(r.top.windows(2).all(|w| w[0].gain >= w[1].gain));
        assert_eq!(r.top[0].word, r.bottom[n - 1].word);
        let total: f64 = r.densities.iter().filter(|d| d.level1 == "business").map(|d| d.share).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }
}
