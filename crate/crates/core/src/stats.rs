//! Statistical kernel: inter-annotator agreement, rank-sum test, correlation,
//! standardisation and least-squares slope.

use serde::Serialize;

use crate::error::{Error, Result};

/// How a p-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TestMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    /// Rank sum of the first sample.
    pub statistic: f64,
    /// Mann-Whitney U of the first sample (`statistic - n_a(n_a+1)/2`).
    pub u_statistic: f64,
    pub p_value: f64,
    pub method: TestMethod,
    pub n_a: usize,
    pub n_b: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correlation {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Combined sample size at or below which the rank-sum test enumerates.
pub const EXACT_RANK_SUM_LIMIT: usize = 20;

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample (n-1) standard deviation.
pub fn sample_sd(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() as f64 - 1.0)).sqrt()
}

/// Fleiss' kappa for a table of per-item category counts where every item
/// was rated by exactly `n_raters` raters.
pub fn fleiss_kappa<R: AsRef<[u32]>>(table: &[R], n_raters: u32) -> Result<f64> {
    if n_raters < 2 {
        return Err(Error::config("fleiss kappa needs at least 2 raters"));
    }
    for (i, row) in table.iter().enumerate() {
        let s: u32 = row.as_ref().iter().sum();
        if s != n_raters {
            return Err(Error::Data(format!(
                "item {i} has {s} ratings, expected {n_raters}"
            )));
        }
    }
    fleiss_kappa_unbalanced(table)
}

/// Fleiss' kappa generalised to items with differing rater counts. Each
/// item's agreement uses its own rater count and category proportions pool
/// all ratings; with a constant count this is the classic statistic.
pub fn fleiss_kappa_unbalanced<R: AsRef<[u32]>>(table: &[R]) -> Result<f64> {
    if table.len() < 2 {
        return Err(Error::config("fleiss kappa needs at least 2 items"));
    }
    let n_cat = table[0].as_ref().len();
    if n_cat < 2 {
        return Err(Error::config("fleiss kappa needs at least 2 categories"));
    }
    let mut totals = vec![0u64; n_cat];
    let mut all = 0u64;
    let mut p_sum = 0.0;
    for (i, row) in table.iter().enumerate() {
        let row = row.as_ref();
        if row.len() != n_cat {
            return Err(Error::Data(format!(
                "item {i} has {} categories, expected {n_cat}",
                row.len()
            )));
        }
        let n: u64 = row.iter().map(|&c| c as u64).sum();
        if n < 2 {
            return Err(Error::Data(format!("item {i} has fewer than 2 ratings")));
        }
        let sq: u64 = row.iter().map(|&c| (c as u64) * (c as u64)).sum();
        p_sum += (sq - n) as f64 / (n * (n - 1)) as f64;
        for (t, &c) in totals.iter_mut().zip(row) {
            *t += c as u64;
        }
        all += n;
    }
    let p_bar = p_sum / table.len() as f64;
    let pe: f64 = totals
        .iter()
        .map(|&t| {
            let p = t as f64 / all as f64;
            p * p
        })
        .sum();
    if (1.0 - pe).abs() < 1e-15 {
        return if (1.0 - p_bar).abs() < 1e-15 {
            Ok(1.0)
        } else {
            Err(Error::arith("fleiss kappa undefined: expected agreement is 1"))
        };
    }
    Ok((p_bar - pe) / (1.0 - pe))
}

/// Midranks (1-based) of the concatenation of `x` and `y`, plus the tie
/// group sizes.
fn midranks(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut all: Vec<(f64, usize)> = x.iter().chain(y).copied().zip(0..).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ranks = vec![0.0; all.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < all.len() {
        let mut j = i + 1;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        // positions i..j share ranks i+1..=j
        let r = (i + 1 + j) as f64 / 2.0;
        for item in &all[i..j] {
            ranks[item.1] = r;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Number of size-`m` subsets of `{1..=n}` for every possible sum.
fn rank_sum_counts(n: usize, m: usize) -> Vec<u64> {
    let max_sum = n * (n + 1) / 2;
    // dp[j][s]: subsets of size j with sum s
    let mut dp = vec![vec![0u64; max_sum + 1]; m + 1];
    dp[0][0] = 1;
    for v in 1..=n {
        for j in (1..=m.min(v)).rev() {
            for s in (v..=max_sum).rev() {
                dp[j][s] += dp[j - 1][s - v];
            }
        }
    }
    dp.swap_remove(m)
}

/// Two-sided Wilcoxon rank-sum test of `x` against `y`.
///
/// Exact enumeration when the pooled sample has at most
/// [`EXACT_RANK_SUM_LIMIT`] values and no ties; otherwise the normal
/// approximation with tie and continuity corrections.
pub fn wilcoxon_rank_sum(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::arith("rank-sum test needs two non-empty samples"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::arith("rank-sum test on non-finite values"));
    }
    let (n_a, n_b) = (x.len(), y.len());
    let n = n_a + n_b;
    let (ranks, ties) = midranks(x, y);
    let w: f64 = ranks[..n_a].iter().sum();
    let u = w - (n_a * (n_a + 1)) as f64 / 2.0;

    let (p, method) = if n <= EXACT_RANK_SUM_LIMIT && ties.is_empty() {
        let counts = rank_sum_counts(n, n_a);
        let total: u64 = counts.iter().sum();
        let w_int = w.round() as usize;
        let lower: u64 = counts[..=w_int].iter().sum();
        let upper: u64 = counts[w_int..].iter().sum();
        let tail = lower.min(upper);
        (((2 * tail) as f64 / total as f64).min(1.0), TestMethod::Exact)
    } else {
        let nf = n as f64;
        let mu = n_a as f64 * (nf + 1.0) / 2.0;
        let tie_term: f64 = ties
            .iter()
            .map(|&t| {
                let t = t as f64;
                t * t * t - t
            })
            .sum::<f64>()
            / (nf * (nf - 1.0));
        let var = (n_a * n_b) as f64 / 12.0 * ((nf + 1.0) - tie_term);
        let p = if var <= 0.0 {
            1.0
        } else {
            let z = ((w - mu).abs() - 0.5).max(0.0) / var.sqrt();
            statrs::function::erf::erfc(z / std::f64::consts::SQRT_2).min(1.0)
        };
        (p, TestMethod::NormalApprox)
    };

    Ok(TestResult {
        statistic: w,
        u_statistic: u,
        p_value: p,
        method,
        n_a,
        n_b,
    })
}

/// Pearson correlation with a two-sided p-value from Student's t.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::Data(format!(
            "paired samples differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::arith("pearson correlation needs at least 3 pairs"));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::arith("pearson correlation of a zero-variance sample"));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t2 = r * r * df / (1.0 - r * r);
        student_t_two_sided(t2, df)
    };
    Ok(Correlation { r, p_value: p, n })
}

/// Two-sided tail probability P(|T| >= t) for `t_squared = t^2`.
pub fn student_t_two_sided(t_squared: f64, df: f64) -> f64 {
    incomplete_beta(df / (df + t_squared), df / 2.0, 0.5).clamp(0.0, 1.0)
}

/// Standardise with the sample standard deviation.
pub fn zscores(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::arith("z-scores need at least 2 values"));
    }
    let m = mean(values);
    let sd = sample_sd(values);
    if !sd.is_finite() || sd <= 0.0 {
        return Err(Error::arith("z-scores of a zero-variance sample"));
    }
    Ok(values.iter().map(|v| (v - m) / sd).collect())
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn regression_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Data("paired samples differ in length".into()));
    }
    if x.len() < 2 {
        return Err(Error::arith("slope needs at least 2 points"));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 {
        return Err(Error::arith("slope undefined for constant x"));
    }
    Ok(sxy / sxx)
}

/// Natural log of the gamma function (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularised incomplete beta `I_x(a, b)` by Lentz's continued fraction.
pub fn incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(1.0 - x, b, a) / b
    }
}

fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
