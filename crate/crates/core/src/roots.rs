//! Simultaneous root finding for real polynomials (Aberth-Ehrlich iteration).

use num_complex::Complex64;

use crate::error::{InarError, Result};

const MAX_ITER: usize = 500;

/// Evaluates `p(z)` and `p'(z)` by Horner's rule. `coeffs` is highest degree first.
fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(coeffs[0], 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in &coeffs[1..] {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    eval_with_derivative(coeffs, z).0
}

/// All complex roots of the polynomial with real `coeffs` (highest degree
/// first, leading coefficient nonzero). Each returned root satisfies
/// `|p(z)| <= tol` unless the iteration fails to converge.
pub fn all_roots(coeffs: &[f64], tol: f64) -> Result<Vec<Complex64>> {
    let lead = *coeffs
        .first()
        .ok_or_else(|| InarError::InvalidArgument("empty polynomial".into()))?;
    if lead == 0.0 {
        return Err(InarError::InvalidArgument("leading coefficient is zero".into()));
    }
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let degree = monic.len() - 1;
    if degree == 0 {
        return Ok(Vec::new());
    }

    // Cauchy bound on the root moduli; start on a circle inside it with an
    // irrational angular offset so no guess sits on the real axis symmetry.
    let bound = 1.0 + monic[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let radius = 0.5 * bound;
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / degree as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();

    let mut converged = false;
    for _ in 0..MAX_ITER {
        let mut max_step = 0.0f64;
        for k in 0..degree {
            let (p, dp) = eval_with_derivative(&monic, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / z[k].norm().max(1.0));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }

    // Newton polish; keeps the step only when the residual improves.
    for root in z.iter_mut() {
        for _ in 0..5 {
            let (p, dp) = eval_with_derivative(&monic, *root);
            if dp.norm() == 0.0 {
                break;
            }
            let candidate = *root - p / dp;
            if eval(&monic, candidate).norm() < p.norm() {
                *root = candidate;
            } else {
                break;
            }
        }
    }

    let worst = z.iter().map(|&r| eval(&monic, r).norm()).fold(0.0, f64::max);
    if !converged && worst > tol {
        return Err(InarError::Numerical(format!(
            "root finder did not converge (max residual {worst:e})"
        )));
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_moduli(mut roots: Vec<Complex64>) -> Vec<f64> {
        roots.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        roots.iter().map(|r| r.norm()).collect()
    }

    #[test]
    fn quadratic_with_real_roots() {
        // (x - 1)(x + 0.5)
        let roots = all_roots(&[1.0, -0.5, -0.5], 1e-12).unwrap();
        let mut re: Vec<f64> = roots.iter().map(|r| r.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 0.5).abs() < 1e-12);
        assert!((re[1] - 1.0).abs() < 1e-12);
        assert!(roots.iter().all(|r| r.im.abs() < 1e-12));
    }

    #[test]
    fn quartic_with_equal_moduli() {
        // (x^2 - 1)(x^2 + 0.5)
        let roots = all_roots(&[1.0, 0.0, -0.5, 0.0, -0.5], 1e-12).unwrap();
        let m = sorted_moduli(roots);
        assert!((m[0] - 1.0).abs() < 1e-12 && (m[1] - 1.0).abs() < 1e-12);
        assert!((m[2] - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn roots_of_unity() {
        let roots = all_roots(&[1.0, 0.0, 0.0, 0.0, 0.0, -1.0], 1e-12).unwrap();
        for r in &roots {
            assert!((r.norm() - 1.0).abs() < 1e-12);
            assert!(eval(&[1.0, 0.0, 0.0, 0.0, 0.0, -1.0], *r).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_zero_leading_coefficient() {
        assert!(all_roots(&[0.0, 1.0], 1e-12).is_err());
        assert!(all_roots(&[], 1e-12).is_err());
        assert!(all_roots(&[2.0], 1e-12).unwrap().is_empty());
    }
}
