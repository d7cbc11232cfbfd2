//! The squared Bessel (zero mean reversion CIR) limit of unit-root models:
//!
//! `dX = a dt + sqrt(b2 X+) dW`, `X_0 = 0`,
//!
//! with `a = mu_eps / phi'(1)` and `b2 = sigma_alpha^2 / phi'(1)^2`. The
//! centred form `M_t = phi'(1) X_t - mu_eps t` solves
//! `dM = sqrt(c (M + mu_eps t)+) dW` with `c = sigma_alpha^2 / phi'(1)`.
//!
//! Naming: `Y = 4X / b2` is a squared Bessel process of dimension
//! `4a / b2`, which is why the zero-start marginal is a gamma law.

use rand::distr::Distribution;
use rand::{Rng, RngExt};
use rand_distr::{Gamma as GammaSampler, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Gamma as GammaLaw};

use crate::error::{InarError, Result};
use crate::model::{classify, ModelSpec, Regime};
use crate::rng::RngStream;
use crate::simulate::check_grid;

/// Step size used by the Euler oracle unless overridden.
pub const DEFAULT_DT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CirParams {
    pub a: f64,
    pub b2: f64,
}

impl CirParams {
    pub fn new(a: f64, b2: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0 && b2.is_finite() && b2 >= 0.0) {
            return Err(InarError::InvalidArgument(format!(
                "CIR parameters must be finite and nonnegative (a = {a}, b2 = {b2})"
            )));
        }
        Ok(CirParams { a, b2 })
    }
}

/// Parameters of the centred equation `dM = sqrt(c (M + mu t)+) dW`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MParams {
    pub mu: f64,
    pub c: f64,
}

fn unit_root_phi_prime(spec: &ModelSpec) -> Result<f64> {
    let class = classify(spec.coefficients())?;
    if class.regime != Regime::Unstable {
        return Err(InarError::WrongRegime { expected: Regime::Unstable, found: class.regime });
    }
    if !class.primitive {
        return Err(InarError::NotPrimitive { d: class.d });
    }
    Ok(class.phi_prime_at_one)
}

pub fn params_from_model(spec: &ModelSpec) -> Result<CirParams> {
    let phi1 = unit_root_phi_prime(spec)?;
    let s2 = spec.coefficients().sigma_alpha_sq();
    CirParams::new(spec.mu_eps() / phi1, s2 / (phi1 * phi1))
}

pub fn params_m(spec: &ModelSpec) -> Result<MParams> {
    let phi1 = unit_root_phi_prime(spec)?;
    Ok(MParams { mu: spec.mu_eps(), c: spec.coefficients().sigma_alpha_sq() / phi1 })
}

/// A path on the grid `0, dt, 2 dt, ...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EulerPath {
    pub dt: f64,
    pub values: Vec<f64>,
    /// Steps whose pre-clamp value was negative.
    pub negative_excursions: usize,
}

impl EulerPath {
    pub fn at(&self, t: f64) -> f64 {
        self.values[grid_steps(t, self.dt).min(self.values.len() - 1)]
    }

    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }
}

fn grid_steps(t: f64, dt: f64) -> usize {
    (t / dt).round() as usize
}

fn check_step(horizon: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite() && horizon.is_finite() && horizon >= dt) {
        return Err(InarError::InvalidArgument(format!("need dt > 0 and horizon >= dt (dt = {dt}, horizon = {horizon})")));
    }
    Ok(())
}

/// Full-truncation Euler for the squared Bessel equation. The internal state
/// may dip below zero; reported values are clamped.
pub fn euler_path<R: Rng + ?Sized>(params: CirParams, horizon: f64, dt: f64, rng: &mut R) -> Result<EulerPath> {
    check_step(horizon, dt)?;
    let steps = grid_steps(horizon, dt);
    let mut values = Vec::with_capacity(steps + 1);
    values.push(0.0);
    let mut negative_excursions = 0;
    let mut x = 0.0f64;
    let (drift, vol) = (params.a * dt, (params.b2 * dt).sqrt());
    for _ in 0..steps {
        x = cir_step(x, drift, vol, rng);
        if x < 0.0 {
            negative_excursions += 1;
        }
        values.push(x.max(0.0));
    }
    Ok(EulerPath { dt, values, negative_excursions })
}

#[inline]
fn cir_step<R: Rng + ?Sized>(x: f64, drift: f64, vol: f64, rng: &mut R) -> f64 {
    let z: f64 = if vol > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
    x + drift + vol * x.max(0.0).sqrt() * z
}

/// Full-truncation Euler for the centred equation. Values are not clamped:
/// `M` itself is signed, only `M + mu t` is nonnegative in the limit.
pub fn euler_path_m<R: Rng + ?Sized>(params: MParams, horizon: f64, dt: f64, rng: &mut R) -> Result<EulerPath> {
    check_step(horizon, dt)?;
    let steps = grid_steps(horizon, dt);
    let mut values = Vec::with_capacity(steps + 1);
    values.push(0.0);
    let mut negative_excursions = 0;
    let mut m = 0.0f64;
    let vol = (params.c * dt).sqrt();
    for i in 0..steps {
        m = m_step(m, params.mu * i as f64 * dt, vol, rng);
        if m + params.mu * (i + 1) as f64 * dt < 0.0 {
            negative_excursions += 1;
        }
        values.push(m);
    }
    Ok(EulerPath { dt, values, negative_excursions })
}

#[inline]
fn m_step<R: Rng + ?Sized>(m: f64, shift: f64, vol: f64, rng: &mut R) -> f64 {
    if vol == 0.0 {
        return m;
    }
    let z: f64 = rng.sample(StandardNormal);
    m + vol * (m + shift).max(0.0).sqrt() * z
}

/// Zero-start marginal law of the limit at a fixed time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarginalLaw {
    Deterministic { value: f64 },
    Gamma { shape: f64, scale: f64 },
}

impl MarginalLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            MarginalLaw::Deterministic { value } => value,
            MarginalLaw::Gamma { shape, scale } => shape * scale,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            MarginalLaw::Deterministic { .. } => 0.0,
            MarginalLaw::Gamma { shape, scale } => shape * scale * scale,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            MarginalLaw::Deterministic { value } => {
                if x >= value {
                    1.0
                } else {
                    0.0
                }
            }
            MarginalLaw::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    GammaLaw::new(shape, 1.0 / scale).expect("positive gamma parameters").cdf(x)
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            MarginalLaw::Deterministic { value } => value,
            MarginalLaw::Gamma { shape, scale } => GammaSampler::new(shape, scale)
                .expect("positive gamma parameters")
                .sample(rng),
        }
    }
}

pub fn exact_marginal(params: CirParams, t: f64) -> Result<MarginalLaw> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(InarError::InvalidArgument(format!("marginal time must be positive, got {t}")));
    }
    if params.b2 == 0.0 || params.a == 0.0 {
        return Ok(MarginalLaw::Deterministic { value: params.a * t });
    }
    Ok(MarginalLaw::Gamma { shape: 2.0 * params.a / params.b2, scale: params.b2 * t / 2.0 })
}

pub fn sample_marginal<R: Rng + ?Sized>(params: CirParams, t: f64, rng: &mut R) -> Result<f64> {
    Ok(exact_marginal(params, t)?.sample(rng))
}

/// Replicates evaluated on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CirEnsemble {
    pub t_grid: Vec<f64>,
    /// `values[rep][j]` at `t_grid[j]`.
    pub values: Vec<Vec<f64>>,
    /// Total pre-clamp negative steps over all replicates (Euler only).
    pub negative_excursions: usize,
    pub steps_per_path: usize,
}

impl CirEnsemble {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    pub fn negative_fraction(&self) -> f64 {
        let total = self.steps_per_path * self.values.len();
        if total == 0 {
            0.0
        } else {
            self.negative_excursions as f64 / total as f64
        }
    }
}

fn check_ensemble(t_grid: &[f64], reps: usize) -> Result<()> {
    check_grid(t_grid)?;
    if reps == 0 {
        return Err(InarError::InvalidArgument("replicate count must be positive".into()));
    }
    Ok(())
}

/// Drives one stepping rule over a grid; replicate `r` uses stream `r`.
fn grid_ensemble<F>(t_grid: &[f64], reps: usize, dt: f64, base_seed: u64, step: F) -> Result<CirEnsemble>
where
    F: Fn(f64, usize, &mut crate::rng::StreamRng) -> f64 + Sync,
{
    check_ensemble(t_grid, reps)?;
    let t_max = t_grid[t_grid.len() - 1];
    check_step(t_max.max(dt), dt)?;
    let marks: Vec<usize> = t_grid.iter().map(|&t| grid_steps(t, dt)).collect();
    let steps = marks[marks.len() - 1];
    let rows = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(base_seed, r as u64).generator();
            let mut row = Vec::with_capacity(marks.len());
            let mut negatives = 0;
            let mut x = 0.0;
            let mut next = 0;
            for i in 0..=steps {
                if i > 0 {
                    x = step(x, i - 1, &mut rng);
                }
                while next < marks.len() && marks[next] == i {
                    row.push(x);
                    next += 1;
                }
                if x < 0.0 {
                    negatives += 1;
                }
            }
            (row, negatives)
        })
        .collect::<Vec<_>>();
    let negative_excursions = rows.iter().map(|r| r.1).sum();
    Ok(CirEnsemble {
        t_grid: t_grid.to_vec(),
        values: rows.into_iter().map(|r| r.0).collect(),
        negative_excursions,
        steps_per_path: steps,
    })
}

/// Euler replicates of the squared Bessel equation, clamped at output.
pub fn euler_ensemble(params: CirParams, t_grid: &[f64], reps: usize, dt: f64, base_seed: u64) -> Result<CirEnsemble> {
    let (drift, vol) = (params.a * dt, (params.b2 * dt).sqrt());
    let mut e = grid_ensemble(t_grid, reps, dt, base_seed, |x, _, rng| cir_step(x, drift, vol, rng))?;
    for row in &mut e.values {
        for v in row.iter_mut() {
            *v = v.max(0.0);
        }
    }
    Ok(e)
}

/// Euler replicates of the centred equation. Negative excursions count
/// steps with `M + mu t < 0`.
pub fn euler_ensemble_m(params: MParams, t_grid: &[f64], reps: usize, dt: f64, base_seed: u64) -> Result<CirEnsemble> {
    let vol = (params.c * dt).sqrt();
    let mu = params.mu;
    // Track the shifted state internally so the sign test in the driver
    // counts the right thing, then undo the shift on the recorded values.
    let mut e = grid_ensemble(t_grid, reps, dt, base_seed, |y, i, rng| {
        let shift = mu * i as f64 * dt;
        m_step(y - shift, shift, vol, rng) + mu * (i + 1) as f64 * dt
    })?;
    for row in &mut e.values {
        for (v, &t) in row.iter_mut().zip(&e.t_grid) {
            *v -= mu * grid_steps(t, dt) as f64 * dt;
        }
    }
    Ok(e)
}

/// Independent exact marginal draws; columns are unrelated, rows are not paths.
pub fn exact_ensemble(params: CirParams, t_grid: &[f64], reps: usize, base_seed: u64) -> Result<CirEnsemble> {
    check_ensemble(t_grid, reps)?;
    let laws = t_grid
        .iter()
        .map(|&t| if t == 0.0 { Ok(MarginalLaw::Deterministic { value: 0.0 }) } else { exact_marginal(params, t) })
        .collect::<Result<Vec<_>>>()?;
    let values = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(base_seed, r as u64).generator();
            laws.iter().map(|law| law.sample(&mut rng)).collect()
        })
        .collect();
    Ok(CirEnsemble { t_grid: t_grid.to_vec(), values, negative_excursions: 0, steps_per_path: 0 })
}
