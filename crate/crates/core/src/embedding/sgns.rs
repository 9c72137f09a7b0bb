use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::EmbeddingModel;
use crate::error::{Error, Result};

/// Skip-gram negative-sampling hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub min_count: u64,
    pub learning_rate: f64,
    /// Frequent-word downsampling threshold as in word2vec; 0 keeps every token.
    pub subsample: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 50,
            window: 5,
            negatives: 5,
            epochs: 5,
            min_count: 5,
            learning_rate: 0.025,
            subsample: 1e-3,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::config(format!("embedding dimension must be at least 2, got {}", self.dim)));
        }
        if self.window == 0 || self.epochs == 0 || self.min_count == 0 {
            return Err(Error::config("window, epochs and min_count must be positive"));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::config("learning rate must be positive"));
        }
        if self.subsample.is_nan() || self.subsample < 0.0 {
            return Err(Error::config("subsample must be non-negative"));
        }
        Ok(())
    }
}

fn sigmoid(x: f32) -> f32 {
    if x > 8.0 {
        1.0
    } else if x < -8.0 {
        0.0
    } else {
        1.0 / (1.0 + (-x).exp())
    }
}

/// Train skip-gram vectors with negative sampling.
///
/// Runs on one thread; the same corpus, order and config give bit-identical
/// vectors.
pub fn train_embeddings<D: AsRef<[String]>>(corpus: &[D], config: &TrainConfig) -> Result<EmbeddingModel> {
    config.validate()?;
    if corpus.iter().all(|d| d.as_ref().is_empty()) {
        return Err(Error::Training("corpus has no tokens".into()));
    }

    let mut counts: HashMap<&str, u64> = HashMap::new();
    for d in corpus {
        for t in d.as_ref() {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut vocab: Vec<(&str, u64)> = counts.into_iter().filter(|&(_, c)| c >= config.min_count).collect();
    if vocab.is_empty() {
        return Err(Error::Training(format!("no word occurs at least {} times", config.min_count)));
    }
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let index: HashMap<String, usize> = vocab.iter().enumerate().map(|(i, (w, _))| (w.to_string(), i)).collect();
    let words: Vec<String> = vocab.iter().map(|(w, _)| w.to_string()).collect();

    let docs: Vec<Vec<usize>> = corpus
        .iter()
        .map(|d| d.as_ref().iter().filter_map(|t| index.get(t).copied()).collect())
        .collect();
    let total_tokens: u64 = docs.iter().map(|d| d.len() as u64).sum();

    let dim = config.dim;
    let v = words.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut syn0: Vec<f32> = (0..v * dim)
        .map(|_| (rng.random::<f32>() - 0.5) / dim as f32)
        .collect();
    let mut syn1 = vec![0.0f32; v * dim];
    let noise = WeightedIndex::new(vocab.iter().map(|(_, c)| (*c as f64).powf(0.75)))
        .map_err(|e| Error::Training(format!("noise distribution: {e}")))?;

    // probability of keeping each occurrence of a word
    let keep: Vec<f64> = vocab
        .iter()
        .map(|&(_, c)| {
            if config.subsample == 0.0 {
                return 1.0;
            }
            let t = config.subsample * total_tokens as f64;
            ((c as f64 / t).sqrt() + 1.0) * t / c as f64
        })
        .collect();

    let planned = (config.epochs as u64 * total_tokens).max(1) as f32;
    let mut processed = 0u64;
    let mut grad = vec![0.0f32; dim];
    let mut doc: Vec<usize> = Vec::new();

    for _ in 0..config.epochs {
        for full in &docs {
            let lr = config.learning_rate as f32 * (1.0 - processed as f32 / planned).max(1e-4);
            processed += full.len() as u64;
            doc.clear();
            doc.extend(full.iter().copied().filter(|&w| keep[w] >= 1.0 || rng.random::<f64>() < keep[w]));
            for (pos, &center) in doc.iter().enumerate() {
                let span = rng.random_range(1..=config.window);
                let lo = pos.saturating_sub(span);
                let hi = (pos + span).min(doc.len() - 1);
                for (cpos, &context) in doc.iter().enumerate().take(hi + 1).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    let input = &mut syn0[center * dim..(center + 1) * dim];
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for k in 0..=config.negatives {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let t = noise.sample(&mut rng);
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let out = &mut syn1[target * dim..(target + 1) * dim];
                        let dot: f32 = input.iter().zip(out.iter()).map(|(a, b)| a * b).sum();
                        let g = (label - sigmoid(dot)) * lr;
                        for ((gr, o), i) in grad.iter_mut().zip(out.iter_mut()).zip(input.iter()) {
                            *gr += g * *o;
                            *o += g * i;
                        }
                    }
                    for (i, g) in input.iter_mut().zip(&grad) {
                        *i += g;
                    }
                }
            }
        }
    }

    if syn0.iter().any(|x| !x.is_finite()) {
        return Err(Error::Training("training diverged".into()));
    }
    EmbeddingModel::from_parts(words, index, dim, syn0)
}
