use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::labeled::LabeledSentence;
use super::lexicon::{Lexicon, LexiconEntry, Origin};
use crate::error::{Error, Result};
use crate::par;
use crate::stats::fleiss_kappa_unbalanced;

/// High-agreement sentences for a theme and the sentences (almost) nobody
/// labeled with it.
#[derive(Debug, Clone)]
pub struct ThemePartition<'a> {
    pub theme: String,
    pub in_set: Vec<&'a LabeledSentence>,
    pub out_set: Vec<&'a LabeledSentence>,
}

/// Split sentences by agreement on `theme`: at least 3/4 of annotators go
/// to `in_set`, at most one vote to `out_set`, the rest are dropped.
pub fn partition_by_theme<'a>(sentences: &'a [LabeledSentence], theme: &str) -> Result<ThemePartition<'a>> {
    if !sentences.iter().any(|s| s.votes.contains_key(theme)) {
        return Err(Error::config(format!("unknown theme `{theme}`")));
    }
    let mut in_set = Vec::new();
    let mut out_set = Vec::new();
    for s in sentences {
        if s.agrees_on(theme) {
            in_set.push(s);
        } else if s.votes_for(theme) <= 1 {
            out_set.push(s);
        }
    }
    Ok(ThemePartition {
        theme: theme.to_owned(),
        in_set,
        out_set,
    })
}

/// Partitions for several themes.
pub fn partition_all<'a>(
    sentences: &'a [LabeledSentence],
    themes: &[String],
) -> Result<BTreeMap<String, ThemePartition<'a>>> {
    themes
        .iter()
        .map(|t| Ok((t.clone(), partition_by_theme(sentences, t)?)))
        .collect()
}

/// Fraction of sentences containing `word`.
pub fn sentence_tf(word: &str, sentences: &[&LabeledSentence]) -> Result<f64> {
    if sentences.is_empty() {
        return Err(Error::arith("sentence tf over an empty set"));
    }
    let n = sentences.iter().filter(|s| s.contains(word)).count();
    Ok(n as f64 / sentences.len() as f64)
}

fn doc_freq(sentences: &[&LabeledSentence]) -> BTreeMap<String, usize> {
    let mut df = BTreeMap::new();
    for s in sentences {
        let distinct: BTreeSet<&String> = s.tokens.iter().collect();
        for w in distinct {
            *df.entry(w.clone()).or_insert(0) += 1;
        }
    }
    df
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InductionThresholds {
    pub tf_min: f64,
    pub tf_max: f64,
    pub gain_min: f64,
}

impl Default for InductionThresholds {
    fn default() -> Self {
        InductionThresholds {
            tf_min: 0.01,
            tf_max: 0.15,
            gain_min: 3.0,
        }
    }
}

impl InductionThresholds {
    pub fn new(tf_min: f64, tf_max: f64, gain_min: f64) -> Result<Self> {
        let t = InductionThresholds { tf_min, tf_max, gain_min };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.tf_min) || !unit(self.tf_max) {
            return Err(Error::config("tf thresholds must lie in [0, 1]"));
        }
        if self.tf_min > self.tf_max {
            return Err(Error::config(format!(
                "tf_min {} exceeds tf_max {}",
                self.tf_min, self.tf_max
            )));
        }
        if !self.gain_min.is_finite() || self.gain_min < 1.0 {
            return Err(Error::config("gain_min must be a finite value >= 1"));
        }
        Ok(())
    }

    /// Stricter-first ordering: higher gain, then higher tf_min, then
    /// lower tf_max.
    fn restrictiveness(&self, other: &Self) -> std::cmp::Ordering {
        other
            .gain_min
            .total_cmp(&self.gain_min)
            .then(other.tf_min.total_cmp(&self.tf_min))
            .then(self.tf_max.total_cmp(&other.tf_max))
    }
}

/// tf statistics of one candidate word for one theme.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordStat {
    pub word: String,
    pub tf: f64,
    pub tf_out: f64,
    pub gain: f64,
}

/// Per-theme word statistics, computed once and thresholded many times.
#[derive(Debug, Clone, Serialize)]
pub struct InductionTable {
    pub themes: BTreeMap<String, Vec<WordStat>>,
}

/// tf and gain of every word occurring in a theme's in-set.
pub fn word_stats(partitions: &BTreeMap<String, ThemePartition<'_>>) -> Result<InductionTable> {
    if let Some(p) = partitions.values().find(|p| p.in_set.is_empty()) {
        return Err(Error::Induction(format!(
            "theme `{}` has no high-agreement sentences",
            p.theme
        )));
    }
    let parts: Vec<&ThemePartition> = partitions.values().collect();
    let stats = par::map(&parts, |p| {
        let df_in = doc_freq(&p.in_set);
        let df_out = doc_freq(&p.out_set);
        let n_in = p.in_set.len() as f64;
        let n_out = p.out_set.len();
        let eps = 1.0 / (n_out as f64 + 1.0);
        let words: Vec<WordStat> = df_in
            .into_iter()
            .map(|(w, c)| {
                let tf = c as f64 / n_in;
                let tf_out = if n_out == 0 {
                    0.0
                } else {
                    df_out.get(&w).copied().unwrap_or(0) as f64 / n_out as f64
                };
                WordStat {
                    gain: tf / tf_out.max(eps),
                    word: w,
                    tf,
                    tf_out,
                }
            })
            .collect();
        (p.theme.clone(), words)
    });
    Ok(InductionTable {
        themes: stats.into_iter().collect(),
    })
}

impl InductionTable {
    /// Threshold the table. A word qualifying for several themes goes to
    /// the one with the highest gain, ties to the alphabetically first.
    pub fn lexicon(&self, th: &InductionThresholds) -> Lexicon {
        let mut best: BTreeMap<&str, (&str, &WordStat)> = BTreeMap::new();
        for (theme, words) in &self.themes {
            for s in words {
                if s.tf < th.tf_min || s.tf > th.tf_max || s.gain < th.gain_min {
                    continue;
                }
                // themes are visited in order, so strict > keeps the first on ties
                match best.get(s.word.as_str()) {
                    Some((_, prev)) if s.gain <= prev.gain => {}
                    _ => {
                        best.insert(&s.word, (theme, s));
                    }
                }
            }
        }
        let mut lex = Lexicon::new(self.themes.keys().cloned());
        for (w, (theme, s)) in best {
            lex.entries.insert(
                w.to_owned(),
                LexiconEntry {
                    theme: theme.to_owned(),
                    origin: Origin::Seed {
                        tf: s.tf,
                        tf_out: s.tf_out,
                        gain: s.gain,
                    },
                },
            );
        }
        lex
    }
}

/// Seed lexicon for the given partitions and thresholds.
pub fn seed_lexicon(
    partitions: &BTreeMap<String, ThemePartition<'_>>,
    thresholds: &InductionThresholds,
) -> Result<Lexicon> {
    thresholds.validate()?;
    Ok(word_stats(partitions)?.lexicon(thresholds))
}

/// Candidate values for each threshold.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ThresholdGrid {
    pub tf_min: Vec<f64>,
    pub tf_max: Vec<f64>,
    pub gain_min: Vec<f64>,
}

impl ThresholdGrid {
    /// The grid explored when tuning the published thresholds.
    pub fn published() -> Self {
        ThresholdGrid {
            tf_min: vec![0.001, 0.01, 0.05],
            tf_max: vec![0.15, 0.30, 0.60, 1.0],
            gain_min: vec![1.5, 2.0, 3.0, 4.0, 6.0],
        }
    }

    pub fn single(th: InductionThresholds) -> Self {
        ThresholdGrid {
            tf_min: vec![th.tf_min],
            tf_max: vec![th.tf_max],
            gain_min: vec![th.gain_min],
        }
    }

    /// Every legal combination, most restrictive first. Combinations with
    /// tf_min > tf_max are left out.
    pub fn combinations(&self) -> Result<Vec<InductionThresholds>> {
        if self.tf_min.is_empty() || self.tf_max.is_empty() || self.gain_min.is_empty() {
            return Err(Error::config("threshold grid has an empty axis"));
        }
        for &v in self.tf_min.iter().chain(&self.tf_max) {
            InductionThresholds::new(v, v, 1.0)?;
        }
        for &g in &self.gain_min {
            InductionThresholds::new(0.0, 1.0, g)?;
        }
        let mut out = Vec::new();
        for &g in &self.gain_min {
            for &lo in &self.tf_min {
                for &hi in self.tf_max.iter().filter(|&&hi| hi >= lo) {
                    out.push(InductionThresholds {
                        tf_min: lo,
                        tf_max: hi,
                        gain_min: g,
                    });
                }
            }
        }
        out.sort_by(|a, b| a.restrictiveness(b));
        out.dedup();
        if out.is_empty() {
            return Err(Error::config("threshold grid has no legal combination"));
        }
        Ok(out)
    }
}

/// One step of the grid walk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridEntry {
    pub thresholds: InductionThresholds,
    /// Words not admitted at any earlier step, with their theme at this step.
    pub added: Vec<(String, String)>,
    pub lexicon_size: usize,
}

/// Walk the grid from the most to the least restrictive combination,
/// listing the words each step adds.
pub fn threshold_grid_report(table: &InductionTable, grid: &ThresholdGrid) -> Result<Vec<GridEntry>> {
    let combos = grid.combinations()?;
    let lexicons = par::map(&combos, |t| table.lexicon(t));
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut out = Vec::with_capacity(combos.len());
    for (t, lex) in combos.into_iter().zip(lexicons) {
        let added: Vec<(String, String)> = lex
            .entries
            .iter()
            .filter(|(w, _)| !seen.contains(*w))
            .map(|(w, e)| (w.clone(), e.theme.clone()))
            .collect();
        seen.extend(added.iter().map(|(w, _)| w.clone()));
        out.push(GridEntry {
            thresholds: t,
            added,
            lexicon_size: lex.len(),
        });
    }
    Ok(out)
}

/// Fleiss' kappa per theme over the binary theme / not-theme votes.
/// Sentences with fewer than two annotators are skipped.
pub fn fleiss_kappa_per_theme(sentences: &[LabeledSentence], themes: &[String]) -> Result<BTreeMap<String, f64>> {
    themes
        .iter()
        .map(|t| {
            let table: Vec<[u32; 2]> = sentences
                .iter()
                .filter(|s| s.n_annotators >= 2)
                .map(|s| {
                    let v = s.votes_for(t);
                    [v, s.n_annotators - v]
                })
                .collect();
            Ok((t.clone(), fleiss_kappa_unbalanced(&table)?))
        })
        .collect()
}
