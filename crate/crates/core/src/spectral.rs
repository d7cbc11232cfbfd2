//! Spectral structure of the companion matrix: Perron root, Perron vectors,
//! the limiting projection of `rho^-n A^n`, and its geometric convergence.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{InarError, Result};
use crate::model::{gcd_support, Coefficients};
use crate::roots;

pub const DEFAULT_ROOT_TOL: f64 = 1e-13;

const BISECTION_MAX_ITER: usize = 200;
const NORM_TOL: f64 = 1e-10;
const ROOT_RESIDUAL_TOL: f64 = 1e-10;

/// The `p x p` matrix with `alpha` in the first row and ones on the subdiagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionMatrix {
    matrix: DMatrix<f64>,
}

impl CompanionMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.matrix
    }
}

pub fn companion(coefficients: &Coefficients) -> Result<CompanionMatrix> {
    if coefficients.is_degenerate() {
        return Err(InarError::DegenerateModel);
    }
    let p = coefficients.order();
    let mut matrix = DMatrix::zeros(p, p);
    for (j, &a) in coefficients.as_slice().iter().enumerate() {
        matrix[(0, j)] = a;
    }
    for i in 1..p {
        matrix[(i, i - 1)] = 1.0;
    }
    Ok(CompanionMatrix { matrix })
}

/// `g(lambda) = sum_k alpha_k lambda^-k - 1`, strictly decreasing on `(0, inf)`.
fn root_function(alphas: &[f64], lambda: f64) -> f64 {
    let inv = lambda.recip();
    let mut pow = 1.0;
    let mut acc = 0.0;
    for &a in alphas {
        pow *= inv;
        acc += a * pow;
    }
    acc - 1.0
}

fn root_function_derivative(alphas: &[f64], lambda: f64) -> f64 {
    let inv = lambda.recip();
    let mut pow = inv;
    let mut acc = 0.0;
    for (k, &a) in alphas.iter().enumerate() {
        pow *= inv;
        acc -= (k + 1) as f64 * a * pow;
    }
    acc
}

/// The unique positive root of the characteristic polynomial.
pub fn perron_root(coefficients: &Coefficients, tol: f64) -> Result<f64> {
    if coefficients.is_degenerate() {
        return Err(InarError::DegenerateModel);
    }
    if !(tol > 0.0) {
        return Err(InarError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let alphas = coefficients.as_slice();
    let p = alphas.len();
    let alpha_p = alphas[p - 1];

    let mut lo = alpha_p.powf(1.0 / p as f64).min(1e-6);
    let mut hi = 1.0 + coefficients.sum();
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..BISECTION_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let g = root_function(alphas, mid);
        if g.abs() <= tol {
            break;
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut rho = mid;
    for _ in 0..3 {
        let g = root_function(alphas, rho);
        let dg = root_function_derivative(alphas, rho);
        let next = rho - g / dg;
        if next.is_finite() && next > 0.0 && root_function(alphas, next).abs() < g.abs() {
            rho = next;
        } else {
            break;
        }
    }
    Ok(rho)
}

/// `phi'(rho) = sum_k k alpha_k rho^(p-k-1)`.
pub fn phi_prime(coefficients: &Coefficients, lambda: f64) -> f64 {
    let p = coefficients.order() as i32;
    let tail: f64 = coefficients
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &a)| (i + 1) as f64 * a * lambda.powi(-(i as i32 + 1)))
        .sum();
    lambda.powi(p - 1) * tail
}

fn require_primitive(coefficients: &Coefficients) -> Result<()> {
    if coefficients.is_degenerate() {
        return Err(InarError::DegenerateModel);
    }
    match gcd_support(coefficients)? {
        1 => Ok(()),
        d => Err(InarError::NotPrimitive { d }),
    }
}

/// Right and left Perron vectors in closed form: `1'u = 1`, `u'v = 1`.
pub fn perron_vectors(coefficients: &Coefficients, rho: f64) -> Result<(DVector<f64>, DVector<f64>)> {
    require_primitive(coefficients)?;
    let alphas = coefficients.as_slice();
    let p = alphas.len();
    let inv = rho.recip();

    let powers: Vec<f64> = (0..p).map(|i| inv.powi(i as i32)).collect();
    let total: f64 = powers.iter().sum();
    let u = DVector::from_iterator(p, powers.iter().map(|w| w / total));

    // sum_k k alpha_k rho^-k, i.e. rho^(1-p) phi'(rho)
    let weighted: f64 = alphas
        .iter()
        .enumerate()
        .map(|(k, &a)| (k + 1) as f64 * a * inv.powi(k as i32 + 1))
        .sum();
    let scale = total / weighted;
    let v = DVector::from_iterator(
        p,
        (1..=p).map(|i| {
            let tail: f64 = (i..=p).map(|l| alphas[l - 1] * inv.powi((l + 1 - i) as i32)).sum();
            scale * tail
        }),
    );
    Ok((u, v))
}

/// `Pi = u v'`.
pub fn projection(u: &DVector<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    u * v.transpose()
}

/// `w_j = e1' A^j e1` for `j = 0..=n`, via `w_j = sum_i alpha_i w_(j-i)`.
pub fn power_weights(coefficients: &Coefficients, n: usize) -> Vec<f64> {
    let alphas = coefficients.as_slice();
    let mut w = Vec::with_capacity(n + 1);
    w.push(1.0);
    for j in 1..=n {
        let next = alphas
            .iter()
            .take(j)
            .enumerate()
            .map(|(i, a)| a * w[j - 1 - i])
            .sum();
        w.push(next);
    }
    w
}

/// Coefficients of `phi(lambda) = lambda^p - alpha_1 lambda^(p-1) - ... - alpha_p`,
/// highest degree first.
pub fn characteristic_polynomial(coefficients: &Coefficients) -> Vec<f64> {
    std::iter::once(1.0)
        .chain(coefficients.as_slice().iter().map(|a| -a))
        .collect()
}

/// All eigenvalues of the companion matrix, sorted by decreasing modulus.
pub fn eigenvalues(coefficients: &Coefficients) -> Result<Vec<num_complex::Complex64>> {
    if coefficients.is_degenerate() {
        return Err(InarError::DegenerateModel);
    }
    let mut roots = roots::all_roots(&characteristic_polynomial(coefficients), ROOT_RESIDUAL_TOL)?;
    roots.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(roots)
}

/// Modulus of the second-largest eigenvalue (0 when `p = 1`).
pub fn second_eigen_modulus(coefficients: &Coefficients) -> Result<f64> {
    let roots = eigenvalues(coefficients)?;
    Ok(roots.get(1).map_or(0.0, |r| r.norm()))
}

/// Spectral norm `sup_|x|=1 |B x|` by power iteration on `B'B`.
pub fn operator_norm(b: &DMatrix<f64>) -> f64 {
    let n = b.ncols();
    if n == 0 {
        return 0.0;
    }
    let gram = b.transpose() * b;
    // Non-symmetric start so the iterate is not orthogonal to the top singular vector.
    let mut x = DVector::from_iterator(n, (0..n).map(|i| 1.0 / (i + 1) as f64 + 0.1));
    x /= x.norm();
    let mut estimate = 0.0;
    for _ in 0..10_000 {
        let y = &gram * &x;
        let norm = y.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let converged = (norm - estimate).abs() <= NORM_TOL * norm;
        estimate = norm;
        x = y / norm;
        if converged {
            break;
        }
    }
    estimate.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralData {
    pub rho: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Row-major `Pi = u v'`.
    pub pi: Vec<Vec<f64>>,
    pub lambda2_mod: f64,
    pub phi_prime_at_rho: f64,
}

pub fn spectral_data(coefficients: &Coefficients) -> Result<SpectralData> {
    require_primitive(coefficients)?;
    let rho = perron_root(coefficients, DEFAULT_ROOT_TOL)?;
    let (u, v) = perron_vectors(coefficients, rho)?;
    let pi = projection(&u, &v);
    Ok(SpectralData {
        rho,
        pi: pi.row_iter().map(|r| r.iter().copied().collect()).collect(),
        u: u.iter().copied().collect(),
        v: v.iter().copied().collect(),
        lambda2_mod: second_eigen_modulus(coefficients)?,
        phi_prime_at_rho: phi_prime(coefficients, rho),
    })
}

/// `|rho^-n A^n - Pi|` for `n = 1..=N` with a fitted envelope `c_A r_A^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceProfile {
    pub norms: Vec<f64>,
    pub c: f64,
    pub r: f64,
}

impl ConvergenceProfile {
    /// Norm at power `n` (one-based).
    pub fn norm_at(&self, n: usize) -> f64 {
        self.norms[n - 1]
    }

    /// Geometric-mean decay ratio between powers `from` and `to`.
    pub fn empirical_ratio(&self, from: usize, to: usize) -> f64 {
        (self.norm_at(to) / self.norm_at(from)).powf(1.0 / (to - from) as f64)
    }
}

// Below this the norms are dominated by rounding in the matrix powers.
const PROFILE_FLOOR: f64 = 1e-12;

pub fn convergence_profile(coefficients: &Coefficients, n_max: usize) -> Result<ConvergenceProfile> {
    require_primitive(coefficients)?;
    if n_max < 2 {
        return Err(InarError::InvalidArgument("profile needs at least two powers".into()));
    }
    let rho = perron_root(coefficients, DEFAULT_ROOT_TOL)?;
    let (u, v) = perron_vectors(coefficients, rho)?;
    let pi = projection(&u, &v);
    let scaled = companion(coefficients)?.into_inner() / rho;

    let mut power = DMatrix::identity(scaled.nrows(), scaled.ncols());
    let mut norms = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        power = &power * &scaled;
        norms.push(operator_norm(&(&power - &pi)));
    }

    let usable = |range: std::ops::RangeInclusive<usize>| -> Vec<(f64, f64)> {
        range
            .filter(|&n| norms[n - 1] > PROFILE_FLOOR)
            .map(|n| (n as f64, norms[n - 1].ln()))
            .collect()
    };
    let mut points = usable(n_max / 2..=n_max);
    if points.len() < 3 {
        points = usable(1..=n_max);
    }
    if points.len() < 2 {
        // Pi is reached exactly (e.g. p = 1); the bound holds with c = 0.
        return Ok(ConvergenceProfile { norms, c: 0.0, r: 0.0 });
    }

    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let r = (sxy / sxx).exp();
    // Smallest c with norms[n] <= c r^n over every computed n.
    let c = norms
        .iter()
        .enumerate()
        .map(|(i, &nm)| nm / r.powi(i as i32 + 1))
        .fold(0.0, f64::max);
    Ok(ConvergenceProfile { norms, c, r })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coef(a: &[f64]) -> Coefficients {
        Coefficients::new(a).unwrap()
    }

    #[test]
    fn companion_layout() {
        let m = companion(&coef(&[0.5, 0.5])).unwrap();
        assert_eq!(m.matrix(), &DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 1.0, 0.0]));
        let m = companion(&coef(&[1.0])).unwrap();
        assert_eq!(m.matrix(), &DMatrix::from_element(1, 1, 1.0));
        let m = companion(&coef(&[0.2, 0.3, 0.5])).unwrap();
        assert_eq!(
            m.matrix(),
            &DMatrix::from_row_slice(3, 3, &[0.2, 0.3, 0.5, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
        );
        assert!(matches!(companion(&coef(&[0.0])), Err(InarError::DegenerateModel)));
    }

    #[test]
    fn perron_root_examples() {
        let tol = DEFAULT_ROOT_TOL;
        assert!((perron_root(&coef(&[0.5, 0.5]), tol).unwrap() - 1.0).abs() < 1e-12);
        assert!((perron_root(&coef(&[0.5]), tol).unwrap() - 0.5).abs() < 1e-12);
        // lambda^2 - 0.3 lambda - 0.9
        let expected = (0.3 + 3.69f64.sqrt()) / 2.0;
        let rho = perron_root(&coef(&[0.3, 0.9]), tol).unwrap();
        assert!((rho - expected).abs() < 1e-12);
        assert!((rho - 1.110468).abs() < 1e-6);
        assert!(perron_root(&coef(&[0.0, 0.0]), tol).is_err());
    }

    #[test]
    fn perron_root_with_tiny_last_coefficient() {
        let c = coef(&[1e-3, 0.0, 0.0, 1e-9]);
        let rho = perron_root(&c, DEFAULT_ROOT_TOL).unwrap();
        assert!(root_function(c.as_slice(), rho).abs() <= DEFAULT_ROOT_TOL);
    }

    #[test]
    fn unit_root_vectors() {
        let (u, v) = perron_vectors(&coef(&[0.5, 0.5]), 1.0).unwrap();
        assert!((u - DVector::from_vec(vec![0.5, 0.5])).amax() < 1e-15);
        assert!((v - DVector::from_vec(vec![4.0 / 3.0, 2.0 / 3.0])).amax() < 1e-15);

        let (u, v) = perron_vectors(&coef(&[1.0]), 1.0).unwrap();
        assert_eq!((u[0], v[0]), (1.0, 1.0));

        let (u, v) = perron_vectors(&coef(&[0.2, 0.8]), 1.0).unwrap();
        assert!((u.clone() - DVector::from_vec(vec![0.5, 0.5])).amax() < 1e-15);
        assert!((v.clone() - DVector::from_vec(vec![10.0 / 9.0, 8.0 / 9.0])).amax() < 1e-15);
        assert!((u.dot(&v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn imprimitive_vectors_rejected() {
        let err = perron_vectors(&coef(&[0.0, 0.5, 0.0, 0.5]), 1.0).unwrap_err();
        assert!(matches!(err, InarError::NotPrimitive { d: 2 }));
        assert!(matches!(spectral_data(&coef(&[0.0, 1.0])), Err(InarError::NotPrimitive { d: 2 })));
    }

    #[test]
    fn projection_examples() {
        let pi = projection(
            &DVector::from_vec(vec![0.5, 0.5]),
            &DVector::from_vec(vec![4.0 / 3.0, 2.0 / 3.0]),
        );
        let expected = DMatrix::from_row_slice(2, 2, &[2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0]);
        assert!((pi.clone() - expected).amax() < 1e-15);
        assert!((&pi * &pi - &pi).amax() < 1e-15);
        let one = projection(&DVector::from_element(1, 1.0), &DVector::from_element(1, 1.0));
        assert_eq!(one[(0, 0)], 1.0);

        for alphas in [vec![0.5, 0.5], vec![0.1, 0.2, 0.7], vec![0.25, 0.0, 0.25, 0.5]] {
            let c = coef(&alphas);
            let s = spectral_data(&c).unwrap();
            assert!((s.pi[0][0] - 1.0 / c.phi_prime_at_one()).abs() < 1e-10);
        }
    }

    #[test]
    fn power_weight_examples() {
        assert_eq!(power_weights(&coef(&[0.5]), 3), vec![1.0, 0.5, 0.25, 0.125]);
        assert_eq!(power_weights(&coef(&[0.5, 0.5]), 4), vec![1.0, 0.5, 0.75, 0.625, 0.6875]);
        assert_eq!(power_weights(&coef(&[0.0]), 2), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn power_weights_match_dense_powers() {
        let c = coef(&[0.1, 0.3, 0.0, 0.2, 0.4]);
        let a = companion(&c).unwrap().into_inner();
        let w = power_weights(&c, 50);
        let mut power = DMatrix::<f64>::identity(5, 5);
        for (j, wj) in w.iter().enumerate() {
            assert!((power[(0, 0)] - wj).abs() < 1e-12, "j = {j}");
            assert!(*wj >= 0.0 && *wj <= operator_norm(&power) + 1e-12);
            power = &power * &a;
        }
    }

    #[test]
    fn second_modulus_examples() {
        assert!((second_eigen_modulus(&coef(&[0.5, 0.5])).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(second_eigen_modulus(&coef(&[0.7])).unwrap(), 0.0);
        let m = second_eigen_modulus(&coef(&[0.0, 0.5, 0.0, 0.5])).unwrap();
        assert!((m - 1.0).abs() < 1e-10);
    }

    #[test]
    fn operator_norm_matches_known_values() {
        let b = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -4.0]);
        assert!((operator_norm(&b) - 4.0).abs() < 1e-8);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((operator_norm(&b) - golden).abs() < 1e-8);
        assert_eq!(operator_norm(&DMatrix::zeros(3, 3)), 0.0);
    }

    #[test]
    fn profile_decays_at_second_eigenvalue_rate() {
        let c = coef(&[0.5, 0.5]);
        let profile = convergence_profile(&c, 40).unwrap();
        assert!((profile.r - 0.5).abs() < 0.05);
        assert!((profile.empirical_ratio(10, 40) - 0.5).abs() < 0.02);
        for (i, &n) in profile.norms.iter().enumerate() {
            assert!(n <= profile.c * profile.r.powi(i as i32 + 1) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn profile_is_zero_for_first_order_unit_root() {
        let profile = convergence_profile(&coef(&[1.0]), 10).unwrap();
        assert!(profile.norms.iter().all(|&n| n == 0.0));
        assert_eq!(profile.c, 0.0);
    }

    #[test]
    fn profile_fit_tracks_eigenvalue_ratio() {
        for alphas in [vec![0.3, 0.3, 0.4], vec![0.6, 0.2], vec![0.2, 0.5, 0.1, 0.4]] {
            let c = coef(&alphas);
            let s = spectral_data(&c).unwrap();
            let profile = convergence_profile(&c, 60).unwrap();
            let target = s.lambda2_mod / s.rho;
            assert!((profile.r - target).abs() <= 0.1 * target, "{alphas:?}: {} vs {target}", profile.r);
        }
    }
}
