//! Exact first and second moments of the zero-start process, martingale
//! second moments, mean limits by regime, and growth-order diagnostics.

use serde::Serialize;

use crate::error::{InarError, Result};
use crate::model::{gcd_support, Coefficients, ModelSpec, Regime};
use crate::spectral::{self, power_weights};

/// Largest horizon accepted by the O(K^2) variance computations.
pub const MAX_HORIZON: usize = 100_000;

const VARIANCE_CROSS_CHECK_TOL: f64 = 1e-9;

fn check_horizon(k: usize) -> Result<()> {
    if k == 0 {
        return Err(InarError::InvalidArgument("horizon must be at least 1".into()));
    }
    if k > MAX_HORIZON {
        return Err(InarError::HorizonTooLarge { requested: k, max: MAX_HORIZON });
    }
    Ok(())
}

/// `E[X_k]`, `Var(X_k)` and `E[M_k^2]` for `k = 1..=K` (index `k - 1`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub m2: Vec<f64>,
}

impl MomentTable {
    pub fn horizon(&self) -> usize {
        self.mean.len()
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, f64, f64, f64)> + '_ {
        (0..self.horizon()).map(|i| (i + 1, self.mean[i], self.variance[i], self.m2[i]))
    }
}

/// Running sums `S_j = sum_(l <= j) w_l`, `j = 0..w.len()`.
fn prefix_sums(w: &[f64]) -> Vec<f64> {
    w.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// `E[X_k] = mu_eps * sum_(j<k) w_j`.
pub fn mean_exact(spec: &ModelSpec, k_max: usize) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(InarError::InvalidArgument("horizon must be at least 1".into()));
    }
    let w = power_weights(spec.coefficients(), k_max - 1);
    let mu = spec.mu_eps();
    Ok(prefix_sums(&w).into_iter().map(|s| mu * s).collect())
}

/// `E[M_k^2] = sum_i alpha_i (1 - alpha_i) E[X_(k-i)] + sigma_eps^2`, zero start.
pub fn m2_exact(spec: &ModelSpec, k_max: usize) -> Result<Vec<f64>> {
    let mean = mean_exact(spec, k_max)?;
    Ok(m2_from_mean(spec, &mean))
}

fn m2_from_mean(spec: &ModelSpec, mean: &[f64]) -> Vec<f64> {
    let alphas = spec.alphas();
    let sigma2 = spec.sigma_eps_sq();
    (1..=mean.len())
        .map(|k| {
            let lagged: f64 = alphas
                .iter()
                .enumerate()
                .filter(|(i, _)| k > i + 1)
                .map(|(i, a)| a * (1.0 - a) * mean[k - i - 2])
                .sum();
            lagged + sigma2
        })
        .collect()
}

/// `Var(X_k)` from the closed-form double sum
/// `sigma_eps^2 sum_(l<k) w_l^2 + mu_eps sum_i alpha_i(1-alpha_i) sum_(j<=k-i-1) w_(k-j-i-1)^2 S_j`.
///
/// The inner sum depends on `k` and `i` only through `m = k - i - 1`, so it is
/// tabulated once as the convolution `C_m = sum_(j<=m) w_(m-j)^2 S_j`.
pub fn var_exact(spec: &ModelSpec, k_max: usize) -> Result<Vec<f64>> {
    check_horizon(k_max)?;
    let w = power_weights(spec.coefficients(), k_max - 1);
    let sq: Vec<f64> = w.iter().map(|x| x * x).collect();
    let s = prefix_sums(&w);
    let q = prefix_sums(&sq);
    let conv: Vec<f64> = (0..k_max)
        .map(|m| (0..=m).map(|j| sq[m - j] * s[j]).sum())
        .collect();

    let mu = spec.mu_eps();
    let sigma2 = spec.sigma_eps_sq();
    let alphas = spec.alphas();
    Ok((1..=k_max)
        .map(|k| {
            let thinning: f64 = alphas
                .iter()
                .enumerate()
                .filter(|(i, _)| k > i + 1)
                .map(|(i, a)| a * (1.0 - a) * conv[k - i - 2])
                .sum();
            sigma2 * q[k - 1] + mu * thinning
        })
        .collect())
}

/// `Var(X_k) = sum_(j=1..k) E[M_j^2] w_(k-j)^2`.
pub fn var_martingale_form(spec: &ModelSpec, k_max: usize) -> Result<Vec<f64>> {
    check_horizon(k_max)?;
    let w = power_weights(spec.coefficients(), k_max - 1);
    let m2 = m2_exact(spec, k_max)?;
    Ok((1..=k_max)
        .map(|k| (1..=k).map(|j| m2[j - 1] * w[k - j] * w[k - j]).sum())
        .collect())
}

/// Full table; the two variance derivations are cross-checked.
pub fn moment_table(spec: &ModelSpec, k_max: usize) -> Result<MomentTable> {
    let mean = mean_exact(spec, k_max)?;
    let variance = var_exact(spec, k_max)?;
    let m2 = m2_from_mean(spec, &mean);
    let alt = var_martingale_form(spec, k_max)?;
    if let Some((k, (a, b))) = variance
        .iter()
        .zip(&alt)
        .enumerate()
        .find(|(_, (a, b))| (*a - *b).abs() > VARIANCE_CROSS_CHECK_TOL * a.abs().max(1.0))
    {
        return Err(InarError::Numerical(format!(
            "variance forms disagree at k = {}: {a} vs {b}",
            k + 1
        )));
    }
    Ok(MomentTable { mean, variance, m2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Normalization {
    /// `lim E[X_k]`.
    Plain,
    /// `lim E[X_k] / k`.
    PerStep,
    /// `lim rho^(-kd) E[X_(kd-j)]`, the same for every `j = 0..d-1`.
    GeometricAlongSubsequence { d: usize, rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanLimit {
    pub regime: Regime,
    pub value: f64,
    pub normalization: Normalization,
}

pub fn mean_limit(spec: &ModelSpec) -> Result<MeanLimit> {
    let c = spec.coefficients();
    let mu = spec.mu_eps();
    if c.is_degenerate() {
        return Ok(MeanLimit { regime: Regime::Stable, value: mu, normalization: Normalization::Plain });
    }
    let regime = c.regime();
    Ok(match regime {
        Regime::Stable => MeanLimit {
            regime,
            value: mu / (1.0 - c.sum()),
            normalization: Normalization::Plain,
        },
        Regime::Unstable => MeanLimit {
            regime,
            value: mu / c.phi_prime_at_one(),
            normalization: Normalization::PerStep,
        },
        Regime::Explosive => {
            let rho = spectral::perron_root(c, spectral::DEFAULT_ROOT_TOL)?;
            let d = gcd_support(c)?;
            let p = c.order() as i32;
            let value = d as f64 * mu * rho.powi(p - 1)
                / ((rho.powi(d as i32) - 1.0) * spectral::phi_prime(c, rho));
            MeanLimit {
                regime,
                value,
                normalization: Normalization::GeometricAlongSubsequence { d, rho },
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub horizon: usize,
    /// `max_k E[X_k] / k`.
    pub max_mean_over_k: f64,
    /// `max_k E[X_k^2] / k^2`.
    pub max_second_moment_over_k2: f64,
    /// `max_k E[M_k^2] / k`.
    pub max_m2_over_k: f64,
    /// `E[X_K] / K`.
    pub final_mean_over_k: f64,
    /// `mu_eps / phi'(1)`.
    pub mean_limit: f64,
}

impl GrowthReport {
    pub fn final_relative_error(&self) -> f64 {
        (self.final_mean_over_k - self.mean_limit).abs() / self.mean_limit
    }
}

/// Growth orders `E X_k = O(k)`, `E X_k^2 = O(k^2)`, `E M_k^2 = O(k)` for a
/// primitive unit-root model.
pub fn growth_check(spec: &ModelSpec, k_max: usize) -> Result<GrowthReport> {
    let c = spec.coefficients();
    if c.is_degenerate() || c.regime() != Regime::Unstable {
        let found = if c.is_degenerate() { Regime::Stable } else { c.regime() };
        return Err(InarError::WrongRegime { expected: Regime::Unstable, found });
    }
    let d = gcd_support(c)?;
    if d != 1 {
        return Err(InarError::NotPrimitive { d });
    }
    let table = moment_table(spec, k_max)?;
    let mut report = GrowthReport {
        horizon: k_max,
        max_mean_over_k: 0.0,
        max_second_moment_over_k2: 0.0,
        max_m2_over_k: 0.0,
        final_mean_over_k: table.mean[k_max - 1] / k_max as f64,
        mean_limit: spec.mu_eps() / c.phi_prime_at_one(),
    };
    for (k, mean, var, m2) in table.rows() {
        let kf = k as f64;
        report.max_mean_over_k = report.max_mean_over_k.max(mean / kf);
        report.max_second_moment_over_k2 =
            report.max_second_moment_over_k2.max((var + mean * mean) / (kf * kf));
        report.max_m2_over_k = report.max_m2_over_k.max(m2 / kf);
    }
    Ok(report)
}

/// Weights `w_0..w_n` for a model given only by its coefficients.
pub fn weights(coefficients: &Coefficients, n: usize) -> Vec<f64> {
    power_weights(coefficients, n)
}
