//! Model definitions: autoregressive coefficients, innovation laws,
//! regime classification and the gcd decomposition of imprimitive models.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{InarError, Result};
use crate::spectral;

/// Absolute tolerance on `sum(alpha) - 1` used to detect the unit root.
pub const UNIT_ROOT_TOL: f64 = 1e-12;

const PMF_SUM_TOL: f64 = 1e-12;

/// Distribution of the iid innovations `eps_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InnovationSpec {
    Poisson { lambda: f64 },
    /// Number of failures before the first success.
    Geometric { prob: f64 },
    /// Number of failures before the `r`-th success; `r` may be fractional.
    NegativeBinomial { r: f64, prob: f64 },
    Bernoulli { prob: f64 },
    Empirical {
        #[serde(with = "pmf_keys")]
        pmf: BTreeMap<u64, f64>,
    },
}

// Internally tagged enums buffer their content, which loses serde_json's
// string-to-integer map key coercion; parse the keys explicitly.
mod pmf_keys {
    use std::collections::BTreeMap;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(pmf: &BTreeMap<u64, f64>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(pmf.iter().map(|(k, v)| (k.to_string(), v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u64, f64>, D::Error> {
        BTreeMap::<String, f64>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| {
                k.trim()
                    .parse::<u64>()
                    .map(|k| (k, v))
                    .map_err(|_| D::Error::custom(format!("pmf support value {k:?} is not a nonnegative integer")))
            })
            .collect()
    }
}

impl InnovationSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(InarError::MalformedInnovation(msg));
        match *self {
            InnovationSpec::Poisson { lambda } => {
                if !(lambda.is_finite() && lambda >= 0.0) {
                    return bad(format!("poisson lambda must be finite and >= 0, got {lambda}"));
                }
            }
            InnovationSpec::Geometric { prob } => {
                if !(prob > 0.0 && prob <= 1.0) {
                    return bad(format!("geometric prob must lie in (0, 1], got {prob}"));
                }
            }
            InnovationSpec::NegativeBinomial { r, prob } => {
                if !(r.is_finite() && r > 0.0) {
                    return bad(format!("negative binomial r must be > 0, got {r}"));
                }
                if !(prob > 0.0 && prob < 1.0) {
                    return bad(format!("negative binomial prob must lie in (0, 1), got {prob}"));
                }
            }
            InnovationSpec::Bernoulli { prob } => {
                if !(0.0..=1.0).contains(&prob) {
                    return bad(format!("bernoulli prob must lie in [0, 1], got {prob}"));
                }
            }
            InnovationSpec::Empirical { ref pmf } => {
                if pmf.is_empty() {
                    return bad("empirical pmf is empty".into());
                }
                if let Some((k, q)) = pmf.iter().find(|(_, q)| !(q.is_finite() && **q >= 0.0)) {
                    return bad(format!("empirical pmf has invalid mass {q} at {k}"));
                }
                let total: f64 = pmf.values().sum();
                if (total - 1.0).abs() > PMF_SUM_TOL {
                    return bad(format!("empirical pmf sums to {total}, not 1"));
                }
                // Keeps mean and variance finite as f64.
                if pmf.keys().any(|&k| k > (1u64 << 52)) {
                    return bad("empirical support exceeds 2^52".into());
                }
            }
        }
        Ok(())
    }

    /// Innovation mean `mu_eps`.
    pub fn mean(&self) -> f64 {
        match *self {
            InnovationSpec::Poisson { lambda } => lambda,
            InnovationSpec::Geometric { prob } => (1.0 - prob) / prob,
            InnovationSpec::NegativeBinomial { r, prob } => r * (1.0 - prob) / prob,
            InnovationSpec::Bernoulli { prob } => prob,
            InnovationSpec::Empirical { ref pmf } => pmf.iter().map(|(&k, &q)| k as f64 * q).sum(),
        }
    }

    /// Innovation variance `sigma_eps^2`.
    pub fn variance(&self) -> f64 {
        match *self {
            InnovationSpec::Poisson { lambda } => lambda,
            InnovationSpec::Geometric { prob } => (1.0 - prob) / (prob * prob),
            InnovationSpec::NegativeBinomial { r, prob } => r * (1.0 - prob) / (prob * prob),
            InnovationSpec::Bernoulli { prob } => prob * (1.0 - prob),
            InnovationSpec::Empirical { ref pmf } => {
                let m = self.mean();
                pmf.iter().map(|(&k, &q)| q * (k as f64 - m).powi(2)).sum()
            }
        }
    }

    /// The pmf as `(value, mass)` pairs when the support is finite.
    pub fn finite_support(&self) -> Option<Vec<(u64, f64)>> {
        match *self {
            InnovationSpec::Bernoulli { prob } => Some(vec![(0, 1.0 - prob), (1, prob)]),
            InnovationSpec::Empirical { ref pmf } => Some(pmf.iter().map(|(&k, &q)| (k, q)).collect()),
            InnovationSpec::Poisson { lambda } if lambda == 0.0 => Some(vec![(0, 1.0)]),
            InnovationSpec::Geometric { prob } if prob == 1.0 => Some(vec![(0, 1.0)]),
            _ => None,
        }
    }
}

/// Canonical autoregressive coefficients `alpha_1..alpha_p` with `alpha_p > 0`.
///
/// An empty coefficient vector is the pure-innovation model `X_k = eps_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients(Vec<f64>);

impl Coefficients {
    /// Validates `raw` and trims trailing zero coefficients.
    pub fn new(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(InarError::InvalidArgument("model order p must be at least 1".into()));
        }
        for (i, &a) in raw.iter().enumerate() {
            if !(0.0..=1.0).contains(&a) {
                return Err(InarError::CoefficientOutOfRange { index: i + 1, value: a });
            }
        }
        let order = raw.iter().rposition(|&a| a > 0.0).map_or(0, |i| i + 1);
        Ok(Coefficients(raw[..order].to_vec()))
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `alpha_lag`, one-based; zero outside `1..=p`.
    pub fn get(&self, lag: usize) -> f64 {
        if lag == 0 {
            0.0
        } else {
            self.0.get(lag - 1).copied().unwrap_or(0.0)
        }
    }

    /// True for the all-zero (pure innovation) model.
    pub fn is_degenerate(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `sigma_alpha^2 = sum alpha_i (1 - alpha_i)`.
    pub fn sigma_alpha_sq(&self) -> f64 {
        self.0.iter().map(|a| a * (1.0 - a)).sum()
    }

    /// `phi'(1) = sum i * alpha_i`.
    pub fn phi_prime_at_one(&self) -> f64 {
        self.0.iter().enumerate().map(|(i, a)| (i + 1) as f64 * a).sum()
    }

    /// Lags with a strictly positive coefficient.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0.0)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn regime(&self) -> Regime {
        let diff = self.sum() - 1.0;
        if diff.abs() <= UNIT_ROOT_TOL {
            Regime::Unstable
        } else if diff < 0.0 {
            Regime::Stable
        } else {
            Regime::Explosive
        }
    }

    /// Spreads the coefficients onto lags `d, 2d, ..., p*d`.
    pub fn dilate(&self, d: usize) -> Coefficients {
        assert!(d >= 1);
        let mut out = vec![0.0; self.order() * d];
        for (i, &a) in self.0.iter().enumerate() {
            out[(i + 1) * d - 1] = a;
        }
        Coefficients(out)
    }

    /// Coefficients `alpha_d, alpha_2d, ..., alpha_p` of one subsequence model.
    fn subsample(&self, d: usize) -> Coefficients {
        Coefficients(self.0.iter().skip(d - 1).step_by(d).copied().collect())
    }
}

/// Full parameterization of an INAR(p) process: coefficients plus innovation law.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    coefficients: Coefficients,
    innovation: InnovationSpec,
}

impl ModelSpec {
    pub fn new(coefficients: Coefficients, innovation: InnovationSpec) -> Result<Self> {
        innovation.validate()?;
        Ok(ModelSpec { coefficients, innovation })
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    pub fn innovation(&self) -> &InnovationSpec {
        &self.innovation
    }

    pub fn alphas(&self) -> &[f64] {
        self.coefficients.as_slice()
    }

    pub fn order(&self) -> usize {
        self.coefficients.order()
    }

    pub fn mu_eps(&self) -> f64 {
        self.innovation.mean()
    }

    pub fn sigma_eps_sq(&self) -> f64 {
        self.innovation.variance()
    }
}

/// Builds a canonical spec from a declared order `p` and raw coefficients.
pub fn validate(p: usize, alphas: &[f64], innovation: InnovationSpec) -> Result<ModelSpec> {
    if p == 0 {
        return Err(InarError::InvalidArgument("model order p must be at least 1".into()));
    }
    if alphas.len() != p {
        return Err(InarError::InvalidArgument(format!(
            "declared order {p} but {} coefficients given",
            alphas.len()
        )));
    }
    ModelSpec::new(Coefficients::new(alphas)?, innovation)
}

/// Greatest common divisor of `{i : alpha_i > 0}`.
pub fn gcd_support(coefficients: &Coefficients) -> Result<usize> {
    coefficients
        .support()
        .into_iter()
        .reduce(gcd)
        .ok_or(InarError::AllCoefficientsZero)
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Stable,
    Unstable,
    Explosive,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Stable => "stable",
            Regime::Unstable => "unstable",
            Regime::Explosive => "explosive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub regime: Regime,
    pub alpha_sum: f64,
    /// Perron root; 0 for the pure-innovation model.
    pub rho: f64,
    pub sigma_alpha_sq: f64,
    pub phi_prime_at_one: f64,
    /// gcd of the coefficient support; 0 for the pure-innovation model.
    pub d: usize,
    pub primitive: bool,
}

pub fn classify(coefficients: &Coefficients) -> Result<Classification> {
    let alpha_sum = coefficients.sum();
    if coefficients.is_degenerate() {
        return Ok(Classification {
            regime: Regime::Stable,
            alpha_sum,
            rho: 0.0,
            sigma_alpha_sq: 0.0,
            phi_prime_at_one: 0.0,
            d: 0,
            primitive: false,
        });
    }
    let d = gcd_support(coefficients)?;
    Ok(Classification {
        regime: coefficients.regime(),
        alpha_sum,
        rho: spectral::perron_root(coefficients, spectral::DEFAULT_ROOT_TOL)?,
        sigma_alpha_sq: coefficients.sigma_alpha_sq(),
        phi_prime_at_one: coefficients.phi_prime_at_one(),
        d,
        primitive: d == 1,
    })
}

/// Splits a model with support gcd `d` into the `d` identical primitive
/// INAR(p/d) models driving the subsequences `X_{dn-j}`, `j = 0..d-1`.
pub fn decompose(spec: &ModelSpec) -> Result<Vec<ModelSpec>> {
    let d = gcd_support(spec.coefficients())?;
    let sub = ModelSpec {
        coefficients: spec.coefficients.subsample(d),
        innovation: spec.innovation.clone(),
    };
    Ok(vec![sub; d])
}

/// JSON model document: `{"alphas": [...], "innovation": {"family": ..., ...}}`.
///
/// The innovation block is optional because estimation workflows only need
/// the coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub innovation: Option<InnovationSpec>,
}

impl SpecDocument {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn coefficients(&self) -> Result<Coefficients> {
        Coefficients::new(&self.alphas)
    }

    pub fn into_model(self) -> Result<ModelSpec> {
        let innovation = self.innovation.ok_or_else(|| {
            InarError::MalformedInnovation("model document has no innovation block".into())
        })?;
        validate(self.alphas.len(), &self.alphas, innovation)
    }
}

impl From<&ModelSpec> for SpecDocument {
    fn from(spec: &ModelSpec) -> Self {
        SpecDocument {
            alphas: spec.alphas().to_vec(),
            innovation: Some(spec.innovation.clone()),
        }
    }
}
