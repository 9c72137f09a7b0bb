use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub wcss: f64,
    pub iterations: usize,
    /// WCSS after every Lloyd iteration of the winning run.
    pub wcss_trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn validate(points: &[Vec<f64>], k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::config("k must be at least 1"));
    }
    if k > points.len() {
        return Err(Error::config(format!(
            "k = {k} exceeds the number of points ({})",
            points.len()
        )));
    }
    let dim = points[0].len();
    for p in points {
        if p.len() != dim {
            return Err(Error::Data("points have differing dimensions".into()));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite coordinate".into()));
        }
    }
    Ok(dim)
}

/// k-means++ seeding.
fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            // rounding can leave `pick` on a zero-weight point
            if d2[pick] == 0.0 {
                pick = d2.iter().rposition(|&d| d > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            // every remaining point coincides with a centroid
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[idx] = true;
        centroids.push(points[idx].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[idx]));
        }
    }
    centroids
}

fn wcss_of(points: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

/// Lloyd iterations from the given centroids until the assignment is a
/// fixpoint or `max_iter` iterations have run.
pub fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iter: usize) -> KMeansResult {
    let k = centroids.len();
    let dim = points[0].len();
    let mut assignments: Vec<usize> = vec![usize::MAX; points.len()];
    let mut trace = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let cur = assignments[i];
            let mut best = if cur < k { cur } else { 0 };
            let mut best_d = sq_dist(p, &centroids[best]);
            for (c, centroid) in centroids.iter().enumerate() {
                let d = sq_dist(p, centroid);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            if best != cur {
                assignments[i] = best;
                changed = true;
            }
        }
        if !changed {
            iterations -= 1;
            break;
        }

        // re-seed empty clusters from the point farthest from its centroid
        let mut sizes = vec![0usize; k];
        for &a in &assignments {
            sizes[a] += 1;
        }
        for c in 0..k {
            if sizes[c] > 0 {
                continue;
            }
            let far = (0..points.len())
                .filter(|&i| sizes[assignments[i]] > 1)
                .max_by(|&a, &b| {
                    sq_dist(&points[a], &centroids[assignments[a]])
                        .total_cmp(&sq_dist(&points[b], &centroids[assignments[b]]))
                        .then(b.cmp(&a))
                });
            if let Some(i) = far {
                sizes[assignments[i]] -= 1;
                assignments[i] = c;
                sizes[c] = 1;
            }
        }

        let mut sums = vec![vec![0.0; dim]; k];
        for (p, &a) in points.iter().zip(&assignments) {
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for (c, s) in sums.into_iter().enumerate() {
            if sizes[c] > 0 {
                centroids[c] = s.into_iter().map(|v| v / sizes[c] as f64).collect();
            }
        }
        trace.push(wcss_of(points, &assignments, &centroids));
    }

    let wcss = wcss_of(points, &assignments, &centroids);
    KMeansResult {
        assignments,
        centroids,
        wcss,
        iterations,
        wcss_trace: trace,
    }
}

/// k-means with k-means++ seeding, keeping the best of `restarts` runs.
/// Restart `r` draws from its own stream derived from `seed`, so the result
/// is deterministic and independent of scheduling.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, restarts: usize) -> Result<KMeansResult> {
    validate(points, k)?;
    let restarts = restarts.max(1);
    let runs = par::map_range(restarts, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let init = plus_plus(points, k, &mut rng);
        lloyd(points, init, MAX_ITERATIONS)
    });
    Ok(runs
        .into_iter()
        .reduce(|best, run| if run.wcss < best.wcss { run } else { best })
        .expect("at least one restart"))
}
