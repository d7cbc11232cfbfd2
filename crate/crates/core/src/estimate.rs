//! Conditional least squares (CLS) and weighted CLS for subset INAR models.
//!
//! For lags `L` with maximum `pbar`, the residuals are
//! `M_k = X_k - sum_(i in L) alpha_i X_(k-i) - mu` for `k = pbar+1..n`.
//! WCLS divides each residual by `sqrt(sum_(j in L) X_(k-j) + 1)`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{InarError, Result};

/// Relative pivot size below which the scaled normal matrix is rank deficient.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cls,
    Wcls,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Cls => "cls",
            Method::Wcls => "wcls",
        })
    }
}

impl FromStr for Method {
    type Err = InarError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cls" => Ok(Method::Cls),
            "wcls" => Ok(Method::Wcls),
            other => Err(InarError::InvalidArgument(format!("unknown method `{other}` (expected cls or wcls)"))),
        }
    }
}

/// Nonempty, strictly increasing set of positive lags.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Lags(Vec<usize>);

impl Lags {
    /// Accepts lags in any order; duplicates and zero are rejected.
    pub fn new(mut lags: Vec<usize>) -> Result<Self> {
        if lags.is_empty() {
            return Err(InarError::InvalidArgument("lag set is empty".into()));
        }
        if lags.contains(&0) {
            return Err(InarError::InvalidArgument("lags must be positive".into()));
        }
        lags.sort_unstable();
        if lags.windows(2).any(|w| w[0] == w[1]) {
            return Err(InarError::InvalidArgument("duplicate lag".into()));
        }
        Ok(Lags(lags))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn max(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for Lags {
    type Err = InarError;

    /// Comma-separated list, e.g. `1,12`.
    fn from_str(s: &str) -> Result<Self> {
        let lags = s
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<usize>()
                    .map_err(|_| InarError::InvalidArgument(format!("invalid lag `{tok}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Lags::new(lags)
    }
}

impl fmt::Display for Lags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitConfig {
    pub lags: Lags,
    pub method: Method,
}

impl FitConfig {
    pub fn new(lags: Lags, method: Method) -> Self {
        FitConfig { lags, method }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub method: Method,
    pub alpha_hat: BTreeMap<usize, f64>,
    pub mu_hat: f64,
    /// Sum of the fitted coefficients.
    pub sigma: f64,
    pub se: f64,
    pub residuals: Vec<f64>,
    pub weighted_residuals: Option<Vec<f64>>,
    /// First and last (1-based) time index entering the objective.
    pub sample_range: (usize, usize),
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn alpha(&self, lag: usize) -> f64 {
        self.alpha_hat.get(&lag).copied().unwrap_or(0.0)
    }

    /// Residuals entering the objective: weighted for WCLS.
    pub fn objective_residuals(&self) -> &[f64] {
        self.weighted_residuals.as_deref().unwrap_or(&self.residuals)
    }

    pub fn parameter_count(&self) -> usize {
        self.alpha_hat.len() + 1
    }
}

/// Regressor rows `(X_(k-l) for l in lags, 1)` with targets `X_k`, for
/// `k = pbar+1..n`, and the WCLS weights.
struct Design {
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
    weights: Vec<f64>,
}

fn design(data: &[u64], lags: &Lags) -> Result<Design> {
    let n = data.len();
    let pbar = lags.max();
    let needed = pbar.saturating_add(lags.len() + 2);
    if n < needed {
        return Err(InarError::InsufficientData { needed, got: n });
    }
    let mut rows = Vec::with_capacity(n - pbar);
    let mut targets = Vec::with_capacity(n - pbar);
    let mut weights = Vec::with_capacity(n - pbar);
    // 0-based index t holds X_(t+1).
    for t in pbar..n {
        let mut row: Vec<f64> = lags.as_slice().iter().map(|&l| data[t - l] as f64).collect();
        let lagged_sum: f64 = row.iter().sum();
        row.push(1.0);
        rows.push(row);
        targets.push(data[t] as f64);
        weights.push(1.0 / (lagged_sum + 1.0).sqrt());
    }
    Ok(Design { rows, targets, weights })
}

/// Solves the (weighted) normal equations with column equilibration and a
/// pivoted QR rank check.
fn solve_normal(d: &Design, weighted: bool) -> Result<Vec<f64>> {
    let r = d.rows[0].len();
    let w = |i: usize| if weighted { d.weights[i] } else { 1.0 };
    let mut gram = DMatrix::<f64>::zeros(r, r);
    let mut rhs = DVector::<f64>::zeros(r);
    for (i, (row, &y)) in d.rows.iter().zip(&d.targets).enumerate() {
        let w2 = w(i) * w(i);
        for a in 0..r {
            rhs[a] += w2 * row[a] * y;
            for b in 0..r {
                gram[(a, b)] += w2 * row[a] * row[b];
            }
        }
    }
    let scale: Vec<f64> = (0..r).map(|a| gram[(a, a)].sqrt()).collect();
    if scale.iter().any(|&s| s == 0.0) {
        return Err(InarError::SingularDesign { rank: scale.iter().filter(|&&s| s > 0.0).count(), cols: r });
    }
    for a in 0..r {
        rhs[a] /= scale[a];
        for b in 0..r {
            gram[(a, b)] /= scale[a] * scale[b];
        }
    }
    let qr = gram.clone().col_piv_qr();
    let diag = qr.r().diagonal().map(f64::abs);
    let rank = diag.iter().filter(|&&v| v > RANK_TOL * diag[0]).count();
    if rank < r {
        return Err(InarError::SingularDesign { rank, cols: r });
    }
    let z = qr
        .solve(&rhs)
        .ok_or(InarError::SingularDesign { rank, cols: r })?;
    Ok((0..r).map(|a| z[a] / scale[a]).collect())
}

fn fit_with(data: &[u64], config: &FitConfig) -> Result<FitResult> {
    let lags = &config.lags;
    let d = design(data, lags)?;
    let weighted = config.method == Method::Wcls;
    let beta = solve_normal(&d, weighted)?;
    let residuals: Vec<f64> = d
        .rows
        .iter()
        .zip(&d.targets)
        .map(|(row, y)| y - row.iter().zip(&beta).map(|(x, b)| x * b).sum::<f64>())
        .collect();
    let weighted_residuals =
        weighted.then(|| residuals.iter().zip(&d.weights).map(|(m, w)| m * w).collect::<Vec<f64>>());
    let alpha_hat: BTreeMap<usize, f64> = lags.as_slice().iter().copied().zip(beta.iter().copied()).collect();
    let mut warnings = Vec::new();
    for (lag, a) in &alpha_hat {
        if !(0.0..=1.0).contains(a) {
            warnings.push(format!("alpha_{lag} = {a:.6} lies outside [0, 1]"));
        }
    }
    let sigma = alpha_hat.values().sum();
    let mut fit = FitResult {
        method: config.method,
        mu_hat: beta[beta.len() - 1],
        alpha_hat,
        sigma,
        se: 0.0,
        residuals,
        weighted_residuals,
        sample_range: (lags.max() + 1, data.len()),
        warnings,
    };
    fit.se = standard_error(&fit, data.len());
    Ok(fit)
}

pub fn cls_fit(data: &[u64], lags: &Lags) -> Result<FitResult> {
    fit_with(data, &FitConfig::new(lags.clone(), Method::Cls))
}

pub fn wcls_fit(data: &[u64], lags: &Lags) -> Result<FitResult> {
    fit_with(data, &FitConfig::new(lags.clone(), Method::Wcls))
}

pub fn fit(data: &[u64], config: &FitConfig) -> Result<FitResult> {
    fit_with(data, config)
}

/// `sqrt(RSS / (n - pbar - r))` over the objective residuals, with `r` the
/// number of estimated parameters including the constant.
pub fn standard_error(fit: &FitResult, n: usize) -> f64 {
    let pbar = fit.alpha_hat.keys().next_back().copied().unwrap_or(0);
    let dof = n.saturating_sub(pbar + fit.parameter_count());
    if dof == 0 {
        return f64::NAN;
    }
    let rss: f64 = fit.objective_residuals().iter().map(|m| m * m).sum();
    (rss / dof as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Acf {
    /// Autocorrelations at lags `1..=max_lag`; lag 0 is 1 by convention.
    pub values: Vec<f64>,
    /// Half-width `2 / sqrt(n)` of the white-noise band.
    pub band: f64,
}

impl Acf {
    pub fn fraction_inside(&self) -> f64 {
        let inside = self.values.iter().filter(|r| r.abs() <= self.band).count();
        inside as f64 / self.values.len().max(1) as f64
    }
}

pub fn residual_acf(residuals: &[f64], max_lag: usize) -> Result<Acf> {
    let n = residuals.len();
    if n <= max_lag {
        return Err(InarError::InsufficientData { needed: max_lag + 1, got: n });
    }
    let mean = residuals.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = residuals.iter().map(|e| e - mean).collect();
    let c0: f64 = centred.iter().map(|e| e * e).sum();
    if c0 == 0.0 {
        return Err(InarError::ZeroVariance);
    }
    let values = (1..=max_lag)
        .map(|h| centred.iter().zip(&centred[h..]).map(|(a, b)| a * b).sum::<f64>() / c0)
        .collect();
    Ok(Acf { values, band: 2.0 / (n as f64).sqrt() })
}
