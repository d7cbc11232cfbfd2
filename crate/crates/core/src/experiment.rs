//! Monte Carlo experiments: convergence of the scaled process to its
//! diffusion limit, moment checks, the Euler oracle for the gamma marginal,
//! and the Boston armed-robberies fits.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::cir::{self, CirParams, MarginalLaw};
use crate::data::CountSeries;
use crate::error::{InarError, Result};
use crate::estimate::{cls_fit, wcls_fit, FitResult, Lags};
use crate::model::ModelSpec;
use crate::moments::{mean_exact, var_exact};
use crate::rng::RngStream;
use crate::simulate::{simulate_ensemble, Simulator};
use crate::stats::{ks_critical, ks_statistic};

/// Deviation threshold, in standard errors, for moment checks.
pub const SE_TOLERANCE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub t: f64,
    pub reps: usize,
    pub mean: f64,
    pub variance: f64,
    pub limit_mean: f64,
    pub limit_variance: f64,
    pub ks: f64,
    pub critical: f64,
}

impl ConvergenceRow {
    pub fn passes(&self) -> bool {
        self.ks < self.critical
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub params: CirParams,
    pub rows: Vec<ConvergenceRow>,
    /// Per `t`: whether KS at the largest `n` is at most KS at the smallest.
    pub improves_with_n: Vec<(f64, bool)>,
}

impl ConvergenceReport {
    pub fn row(&self, n: usize, t: f64) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.n == n && r.t == t)
    }
}

fn sample_moments(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    (mean, var)
}

/// KS distances between the scaled process and the limit marginal, for each
/// `n` and each positive `t`. Times equal to zero are skipped.
pub fn mc_convergence(
    spec: &ModelSpec,
    n_list: &[usize],
    t_grid: &[f64],
    reps: usize,
    base_seed: u64,
) -> Result<ConvergenceReport> {
    let params = cir::params_from_model(spec)?;
    if reps == 0 || n_list.is_empty() {
        return Err(InarError::InvalidArgument("need reps > 0 and at least one n".into()));
    }
    let times: Vec<f64> = t_grid.iter().copied().filter(|&t| t > 0.0).collect();
    let laws = times
        .iter()
        .map(|&t| cir::exact_marginal(params, t))
        .collect::<Result<Vec<MarginalLaw>>>()?;
    let mut rows = Vec::new();
    for &n in n_list {
        let ensemble = simulate_ensemble(spec, n, &times, reps, base_seed)?;
        for (j, (&t, law)) in times.iter().zip(&laws).enumerate() {
            let col = ensemble.column(j);
            let (mean, variance) = sample_moments(&col);
            rows.push(ConvergenceRow {
                n,
                t,
                reps,
                mean,
                variance,
                limit_mean: law.mean(),
                limit_variance: law.variance(),
                ks: ks_statistic(&col, |x| law.cdf(x)),
                critical: ks_critical(reps),
            });
        }
    }
    let (n_lo, n_hi) = (*n_list.iter().min().unwrap(), *n_list.iter().max().unwrap());
    let improves_with_n = times
        .iter()
        .map(|&t| {
            let ks = |n| rows.iter().find(|r: &&ConvergenceRow| r.n == n && r.t == t).map(|r| r.ks);
            (t, ks(n_hi) <= ks(n_lo))
        })
        .collect();
    Ok(ConvergenceReport { params, rows, improves_with_n })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub t: f64,
    pub ks: f64,
    pub critical: f64,
    pub negative_fraction: f64,
}

impl OracleRow {
    pub fn passes(&self) -> bool {
        self.ks < self.critical
    }
}

/// Compares full-truncation Euler paths with the gamma marginal at each
/// positive grid time. This is the check that licenses the gamma law as the
/// reference in [`mc_convergence`].
pub fn gamma_oracle(params: CirParams, t_grid: &[f64], reps: usize, dt: f64, base_seed: u64) -> Result<Vec<OracleRow>> {
    let times: Vec<f64> = t_grid.iter().copied().filter(|&t| t > 0.0).collect();
    let ensemble = cir::euler_ensemble(params, &times, reps, dt, base_seed)?;
    let negative_fraction = ensemble.negative_fraction();
    times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let law = cir::exact_marginal(params, t)?;
            Ok(OracleRow {
                t,
                ks: ks_statistic(&ensemble.column(j), |x| law.cdf(x)),
                critical: ks_critical(reps),
                negative_fraction,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheckRow {
    pub k: usize,
    pub sample_mean: f64,
    pub mean_se: f64,
    pub exact_mean: f64,
    pub sample_variance: f64,
    pub variance_se: f64,
    pub exact_variance: f64,
    pub within_tolerance: bool,
}

fn within(sample: f64, exact: f64, se: f64) -> bool {
    let diff = (sample - exact).abs();
    diff <= SE_TOLERANCE * se || diff <= 1e-12 * exact.abs().max(1.0)
}

/// Sample mean and variance of `X_k` over `reps` paths against the exact
/// moments. The variance standard error uses the sample fourth moment.
pub fn moment_mc_check(spec: &ModelSpec, k_list: &[usize], reps: usize, base_seed: u64) -> Result<Vec<MomentCheckRow>> {
    if reps < 1000 {
        return Err(InarError::InvalidArgument(format!("need at least 10^3 replicates, got {reps}")));
    }
    if k_list.is_empty() || k_list.contains(&0) {
        return Err(InarError::InvalidArgument("time indices must be positive".into()));
    }
    let horizon = *k_list.iter().max().unwrap();
    let mean = mean_exact(spec, horizon)?;
    let var = var_exact(spec, horizon)?;
    let sim = Simulator::new(spec)?;
    let samples = (0..reps)
        .into_par_iter()
        .map(|r| {
            let path = sim.path(horizon, &mut RngStream::new(base_seed, r as u64).generator(), false)?;
            Ok(k_list.iter().map(|&k| path.at(k) as f64).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let m = reps as f64;
    Ok(k_list
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let xs: Vec<f64> = samples.iter().map(|row| row[j]).collect();
            let (sample_mean, sample_variance) = sample_moments(&xs);
            let m4 = xs.iter().map(|x| (x - sample_mean).powi(4)).sum::<f64>() / m;
            let mean_se = (sample_variance / m).sqrt();
            let variance_se = ((m4 - sample_variance * sample_variance).max(0.0) / m).sqrt();
            let (exact_mean, exact_variance) = (mean[k - 1], var[k - 1]);
            MomentCheckRow {
                k,
                sample_mean,
                mean_se,
                exact_mean,
                sample_variance,
                variance_se,
                exact_variance,
                within_tolerance: within(sample_mean, exact_mean, mean_se)
                    && within(sample_variance, exact_variance, variance_se),
            }
        })
        .collect())
}

/// Reference fit of a subset model on the Boston series, as reported in the
/// literature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub alpha_1: f64,
    pub alpha_12: f64,
    pub mu: f64,
    pub sigma: f64,
    pub se: f64,
}

pub const REFERENCE_CLS: ReferenceRow =
    ReferenceRow { alpha_1: 0.6069, alpha_12: 0.412, mu: 14.971, sigma: 1.0189, se: 526.8 };
pub const REFERENCE_WCLS: ReferenceRow =
    ReferenceRow { alpha_1: 0.682, alpha_12: 0.3497, mu: 9.961, sigma: 1.0317, se: 26.18 };

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BostonReport {
    pub cls: FitResult,
    pub wcls: FitResult,
    pub reference_cls: ReferenceRow,
    pub reference_wcls: ReferenceRow,
}

pub fn boston_report(series: &CountSeries) -> Result<BostonReport> {
    boston_report_with(series, &Lags::new(vec![1, 12])?)
}

pub fn boston_report_with(series: &CountSeries, lags: &Lags) -> Result<BostonReport> {
    if series.len() < 14 {
        return Err(InarError::InsufficientData { needed: 14, got: series.len() });
    }
    Ok(BostonReport {
        cls: cls_fit(&series.values, lags)?,
        wcls: wcls_fit(&series.values, lags)?,
        reference_cls: REFERENCE_CLS,
        reference_wcls: REFERENCE_WCLS,
    })
}

impl BostonReport {
    /// Fixed-width table with fitted and reference rows.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>10} {:>10} {:>10} {:>10} {:>10}",
            "row", "alpha_1", "alpha_12", "mu", "Sigma", "SE"
        );
        let fitted = |f: &FitResult| ReferenceRow {
            alpha_1: f.alpha(1),
            alpha_12: f.alpha(12),
            mu: f.mu_hat,
            sigma: f.sigma,
            se: f.se,
        };
        for (label, row) in [
            ("cls", fitted(&self.cls)),
            ("cls-ref", self.reference_cls),
            ("wcls", fitted(&self.wcls)),
            ("wcls-ref", self.reference_wcls),
        ] {
            let _ = writeln!(
                out,
                "{:<10} {:>10.4} {:>10.4} {:>10.3} {:>10.4} {:>10.2}",
                label, row.alpha_1, row.alpha_12, row.mu, row.sigma, row.se
            );
        }
        out
    }
}
