//! Exact-distribution simulation by binomial thinning.

use rand::distr::Distribution;
use rand::{Rng, RngExt};
use rand_distr::{Binomial, Gamma, Geometric, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{InarError, Result};
use crate::model::{InnovationSpec, ModelSpec};
use crate::rng::RngStream;

const BERNOULLI_SUM_LIMIT: u64 = 64;
const INVERSION_LIMIT: u64 = 1000;

/// Binomial thinning `alpha o x`: a Binomial(x, alpha) draw.
pub fn thin<R: Rng + ?Sized>(x: u64, alpha: f64, rng: &mut R) -> u64 {
    if x == 0 || alpha <= 0.0 {
        return 0;
    }
    if alpha >= 1.0 {
        return x;
    }
    if x < BERNOULLI_SUM_LIMIT {
        (0..x).filter(|_| rng.random::<f64>() < alpha).count() as u64
    } else if x < INVERSION_LIMIT {
        binomial_inversion(x, alpha, rng)
    } else {
        // BTPE: exact acceptance-rejection.
        Binomial::new(x, alpha)
            .expect("alpha in (0, 1)")
            .sample(rng)
    }
}

/// Sequential inversion from zero on the smaller of `alpha`, `1 - alpha`.
fn binomial_inversion<R: Rng + ?Sized>(n: u64, alpha: f64, rng: &mut R) -> u64 {
    let flip = alpha > 0.5;
    let q = if flip { 1.0 - alpha } else { alpha };
    let odds = q / (1.0 - q);
    // (1 - q)^n >= 2^-999 here, well inside the normal range.
    let mut mass = (1.0 - q).powi(n as i32);
    let mut cdf = mass;
    let u: f64 = rng.random();
    let mut k = 0;
    while u > cdf && k < n {
        mass *= odds * (n - k) as f64 / (k + 1) as f64;
        k += 1;
        cdf += mass;
    }
    if flip {
        n - k
    } else {
        k
    }
}

/// Prepared sampler for the innovation law.
#[derive(Debug, Clone)]
pub enum InnovationSampler {
    Poisson(Option<Poisson<f64>>),
    Geometric(Geometric),
    NegativeBinomial(Gamma<f64>),
    Bernoulli(f64),
    Table { values: Vec<u64>, cdf: Vec<f64> },
}

impl InnovationSampler {
    pub fn new(spec: &InnovationSpec) -> Result<Self> {
        spec.validate()?;
        let malformed = |e: &dyn std::fmt::Display| InarError::MalformedInnovation(e.to_string());
        Ok(match *spec {
            InnovationSpec::Poisson { lambda } => InnovationSampler::Poisson(if lambda > 0.0 {
                Some(Poisson::new(lambda).map_err(|e| malformed(&e))?)
            } else {
                None
            }),
            InnovationSpec::Geometric { prob } => {
                InnovationSampler::Geometric(Geometric::new(prob).map_err(|e| malformed(&e))?)
            }
            InnovationSpec::NegativeBinomial { r, prob } => InnovationSampler::NegativeBinomial(
                Gamma::new(r, (1.0 - prob) / prob).map_err(|e| malformed(&e))?,
            ),
            InnovationSpec::Bernoulli { prob } => InnovationSampler::Bernoulli(prob),
            InnovationSpec::Empirical { ref pmf } => {
                let values = pmf.keys().copied().collect();
                let cdf = pmf
                    .values()
                    .scan(0.0, |acc, q| {
                        *acc += q;
                        Some(*acc)
                    })
                    .collect();
                InnovationSampler::Table { values, cdf }
            }
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            InnovationSampler::Poisson(None) => 0,
            InnovationSampler::Poisson(Some(d)) => d.sample(rng) as u64,
            InnovationSampler::Geometric(d) => d.sample(rng),
            InnovationSampler::NegativeBinomial(gamma) => {
                let lambda = gamma.sample(rng);
                match Poisson::new(lambda) {
                    Ok(d) => d.sample(rng) as u64,
                    Err(_) => 0,
                }
            }
            InnovationSampler::Bernoulli(p) => u64::from(rng.random::<f64>() < *p),
            InnovationSampler::Table { values, cdf } => {
                let u: f64 = rng.random();
                let idx = cdf.partition_point(|&c| c <= u).min(values.len() - 1);
                values[idx]
            }
        }
    }
}

/// A simulated zero-start trajectory `X_1..X_N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub counts: Vec<u64>,
    /// Martingale differences `M_k = X_k - sum_i alpha_i X_(k-i) - mu_eps`.
    pub mdiffs: Option<Vec<f64>>,
}

impl Path {
    pub fn horizon(&self) -> usize {
        self.counts.len()
    }

    /// `X_k` with the zero-start convention `X_j = 0` for `j <= 0`.
    pub fn at(&self, k: usize) -> u64 {
        if k == 0 {
            0
        } else {
            self.counts[k - 1]
        }
    }
}

/// Steps an INAR(p) recursion with reusable samplers.
#[derive(Debug, Clone)]
pub struct Simulator {
    alphas: Vec<f64>,
    mu_eps: f64,
    innovation: InnovationSampler,
}

impl Simulator {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        Ok(Simulator {
            alphas: spec.alphas().to_vec(),
            mu_eps: spec.mu_eps(),
            innovation: InnovationSampler::new(spec.innovation())?,
        })
    }

    /// One step from `history = (X_(k-1), ..., X_(k-p))`; shorter histories are
    /// padded with zeros.
    pub fn step<R: Rng + ?Sized>(&self, history: &[u64], rng: &mut R) -> Option<u64> {
        let mut next = self.innovation.sample(rng);
        for (&alpha, &x) in self.alphas.iter().zip(history) {
            next = next.checked_add(thin(x, alpha, rng))?;
        }
        Some(next)
    }

    pub fn path<R: Rng + ?Sized>(&self, horizon: usize, rng: &mut R, record_mdiffs: bool) -> Result<Path> {
        if horizon == 0 {
            return Err(InarError::InvalidArgument("horizon must be at least 1".into()));
        }
        let p = self.alphas.len();
        let mut counts = Vec::with_capacity(horizon);
        let mut mdiffs = record_mdiffs.then(|| Vec::with_capacity(horizon));
        // Most recent value first.
        let mut history = vec![0u64; p];
        for step in 1..=horizon {
            let x = self
                .step(&history, rng)
                .ok_or(InarError::HorizonOverflow { step })?;
            if let Some(m) = mdiffs.as_mut() {
                let cond: f64 = self.alphas.iter().zip(&history).map(|(a, &h)| a * h as f64).sum();
                m.push(x as f64 - cond - self.mu_eps);
            }
            if p > 0 {
                history.rotate_right(1);
                history[0] = x;
            }
            counts.push(x);
        }
        Ok(Path { counts, mdiffs })
    }
}

pub fn simulate_path(spec: &ModelSpec, horizon: usize, stream: RngStream, record_mdiffs: bool) -> Result<Path> {
    Simulator::new(spec)?.path(horizon, &mut stream.generator(), record_mdiffs)
}

/// Independent paths; replicate `r` uses stream index `r`. The result does
/// not depend on the rayon pool size.
pub fn simulate_paths(
    spec: &ModelSpec,
    horizon: usize,
    reps: usize,
    base_seed: u64,
    record_mdiffs: bool,
) -> Result<Vec<Path>> {
    let sim = Simulator::new(spec)?;
    (0..reps)
        .into_par_iter()
        .map(|r| sim.path(horizon, &mut RngStream::new(base_seed, r as u64).generator(), record_mdiffs))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalMeanCheck {
    pub estimate: f64,
    pub expected: f64,
    pub std_error: f64,
}

impl ConditionalMeanCheck {
    pub fn z_score(&self) -> f64 {
        if self.std_error == 0.0 {
            if self.estimate == self.expected {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.estimate - self.expected) / self.std_error
        }
    }
}

/// Monte Carlo estimate of `E[X_k | history]` against
/// `sum_i alpha_i history_i + mu_eps`.
pub fn conditional_mean_check(
    spec: &ModelSpec,
    history: &[u64],
    reps: usize,
    stream: RngStream,
) -> Result<ConditionalMeanCheck> {
    if reps < 10_000 {
        return Err(InarError::InvalidArgument(format!("need at least 10^4 replicates, got {reps}")));
    }
    if history.len() != spec.order() {
        return Err(InarError::InvalidArgument(format!(
            "history has {} values, model order is {}",
            history.len(),
            spec.order()
        )));
    }
    let sim = Simulator::new(spec)?;
    let mut rng = stream.generator();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..reps {
        let x = sim.step(history, &mut rng).ok_or(InarError::HorizonOverflow { step: 1 })? as f64;
        sum += x;
        sum_sq += x * x;
    }
    let n = reps as f64;
    let estimate = sum / n;
    let var = (sum_sq - n * estimate * estimate) / (n - 1.0);
    let expected = spec
        .alphas()
        .iter()
        .zip(history)
        .map(|(a, &h)| a * h as f64)
        .sum::<f64>()
        + spec.mu_eps();
    Ok(ConditionalMeanCheck { estimate, expected, std_error: (var.max(0.0) / n).sqrt() })
}

/// `floor(n t)`, the time index behind the step process at `t`.
pub fn grid_index(n: usize, t: f64) -> usize {
    (n as f64 * t).floor() as usize
}

/// Step-process value `X_floor(nt) / n`.
pub fn scaled_value(path: &Path, n: usize, t: f64) -> Result<f64> {
    if n == 0 || !(t >= 0.0) || !t.is_finite() {
        return Err(InarError::InvalidArgument(format!("need n >= 1 and finite t >= 0 (n = {n}, t = {t})")));
    }
    let index = grid_index(n, t);
    if index > path.horizon() {
        return Err(InarError::HorizonExceeded { index, horizon: path.horizon() });
    }
    Ok(path.at(index) as f64 / n as f64)
}

/// Scaled values of `reps` independent paths on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ensemble {
    pub n: usize,
    pub t_grid: Vec<f64>,
    /// `values[rep][j]` is the step process of replicate `rep` at `t_grid[j]`.
    pub values: Vec<Vec<f64>>,
}

impl Ensemble {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(InarError::InvalidArgument("time grid is empty".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(InarError::InvalidArgument("time grid values must be finite and >= 0".into()));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(InarError::InvalidArgument("time grid must be sorted".into()));
    }
    Ok(())
}

pub fn simulate_ensemble(
    spec: &ModelSpec,
    n: usize,
    t_grid: &[f64],
    reps: usize,
    base_seed: u64,
) -> Result<Ensemble> {
    check_grid(t_grid)?;
    if n == 0 || reps == 0 {
        return Err(InarError::InvalidArgument("scale n and replicate count must be positive".into()));
    }
    let t_max = t_grid[t_grid.len() - 1];
    let horizon = ((n as f64 * t_max).ceil() as usize).max(grid_index(n, t_max)).max(1);
    let sim = Simulator::new(spec)?;
    let values = (0..reps)
        .into_par_iter()
        .map(|r| {
            let path = sim.path(horizon, &mut RngStream::new(base_seed, r as u64).generator(), false)?;
            t_grid.iter().map(|&t| scaled_value(&path, n, t)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble { n, t_grid: t_grid.to_vec(), values })
}
