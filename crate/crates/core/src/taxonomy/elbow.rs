use serde::Serialize;

use super::kmeans::{kmeans, lloyd, KMeansResult, MAX_ITERATIONS};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Serialize)]
pub struct ElbowCurve {
    pub ks: Vec<usize>,
    pub wcss: Vec<f64>,
    pub chosen: usize,
    #[serde(skip)]
    pub fits: Vec<KMeansResult>,
}

impl ElbowCurve {
    /// The clustering at the chosen k.
    pub fn chosen_fit(&self) -> &KMeansResult {
        let i = self.ks.iter().position(|&k| k == self.chosen).expect("chosen k is on the curve");
        &self.fits[i]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Add `extra` centroids one at a time, each at the point farthest from its
/// nearest existing centroid.
fn extend_centroids(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, extra: usize) -> Vec<Vec<f64>> {
    let mut near: Vec<f64> = points
        .iter()
        .map(|p| centroids.iter().map(|c| sq_dist(p, c)).fold(f64::INFINITY, f64::min))
        .collect();
    for _ in 0..extra {
        let far = (0..points.len())
            .max_by(|&a, &b| near[a].total_cmp(&near[b]).then(b.cmp(&a)))
            .unwrap_or(0);
        let c = points[far].clone();
        for (d, p) in near.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Index of the curve point farthest from the chord between the first and
/// last points, with both axes rescaled to [0, 1]. Ties go to the smallest k.
pub fn chord_elbow(ks: &[usize], wcss: &[f64]) -> usize {
    let (k0, kn) = (ks[0] as f64, ks[ks.len() - 1] as f64);
    let (w0, wn) = (wcss[0], wcss[wcss.len() - 1]);
    let w_span = w0 - wn;
    let mut best = 0;
    let mut best_d = 0.0;
    for (i, (&k, &w)) in ks.iter().zip(wcss).enumerate() {
        let x = (k as f64 - k0) / (kn - k0);
        let y = if w_span > 0.0 { (w - wn) / w_span } else { 0.0 };
        // chord runs from (0, 1) to (1, 0)
        let d = (1.0 - x - y).abs() / std::f64::consts::SQRT_2;
        if d > best_d + 1e-12 {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Fit k-means at every k in `k_range` and pick the elbow.
///
/// WCSS is forced non-increasing: when a larger k comes out worse than its
/// predecessor, it is refit from the predecessor's centroids plus the
/// farthest points, which can only lower the objective.
pub fn elbow_select(points: &[Vec<f64>], k_range: &[usize], seed: u64, restarts: usize) -> Result<ElbowCurve> {
    let mut ks = k_range.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.len() < 3 {
        return Err(Error::config(format!(
            "elbow selection needs at least 3 distinct k values, got {}",
            ks.len()
        )));
    }
    let fits: Vec<Result<KMeansResult>> = par::map(&ks, |&k| kmeans(points, k, seed, restarts));
    let mut fits: Vec<KMeansResult> = fits.into_iter().collect::<Result<_>>()?;

    for i in 1..fits.len() {
        if fits[i].wcss > fits[i - 1].wcss {
            let init = extend_centroids(points, fits[i - 1].centroids.clone(), ks[i] - ks[i - 1]);
            let warm = lloyd(points, init, MAX_ITERATIONS);
            log::debug!(
                "k={}: refit from k={} ({} -> {})",
                ks[i],
                ks[i - 1],
                fits[i].wcss,
                warm.wcss
            );
            if warm.wcss < fits[i].wcss {
                fits[i] = warm;
            }
            // guard against rounding in the refit
            if fits[i].wcss > fits[i - 1].wcss {
                fits[i].wcss = fits[i - 1].wcss;
            }
        }
    }

    let wcss: Vec<f64> = fits.iter().map(|f| f.wcss).collect();
    let chosen = ks[chord_elbow(&ks, &wcss)];
    Ok(ElbowCurve { ks, wcss, chosen, fits })
}
