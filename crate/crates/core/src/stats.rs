//! Goodness-of-fit statistics used by the Monte Carlo checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Asymptotic 1% critical coefficient of the Kolmogorov distribution.
pub const KS_COEFF_1PCT: f64 = 1.63;

/// Minimum expected count per chi-square cell after pooling.
const MIN_EXPECTED: f64 = 5.0;

/// One-sample Kolmogorov-Smirnov statistic `sup |F_m - F|`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        // Ties: the empirical CDF jumps once over the whole run.
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let f = cdf(xs[i]);
        d = d.max((f - i as f64 / m).abs()).max(((j + 1) as f64 / m - f).abs());
        i = j + 1;
    }
    d
}

pub fn ks_critical(m: usize) -> f64 {
    KS_COEFF_1PCT / (m as f64).sqrt()
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (m, n) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    d
}

pub fn ks_two_sample_critical(m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    KS_COEFF_1PCT * ((m + n) / (m * n)).sqrt()
}

/// Pearson chi-square statistic with adjacent cells pooled until each has
/// expected count at least 5. Returns `(statistic, degrees of freedom)`.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> (f64, usize) {
    assert_eq!(observed.len(), expected.len());
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&obs, &exp) in observed.iter().zip(expected) {
        o += obs as f64;
        e += exp;
        if e >= MIN_EXPECTED {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    let stat = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    (stat, cells.len().saturating_sub(1))
}

/// Upper `level` quantile of the chi-square law with `dof` degrees of freedom.
pub fn chi_square_critical(dof: usize, level: f64) -> f64 {
    if dof == 0 {
        return f64::INFINITY;
    }
    ChiSquared::new(dof as f64)
        .expect("positive dof")
        .inverse_cdf(1.0 - level)
}

/// Sample mean and its standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
