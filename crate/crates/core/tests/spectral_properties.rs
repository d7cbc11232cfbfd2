use inar::spectral::{companion, eigenvalues, power_weights, spectral_data};
use inar::{classify, gcd_support, Coefficients, Regime};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Random coefficient vectors with `alpha_1 > 0`, hence primitive.
fn primitive_alphas() -> impl Strategy<Value = Vec<f64>> {
    (1usize..=8).prop_flat_map(|p| {
        (
            0.05f64..1.0,
            proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], p - 1),
            0.01f64..1.0,
        )
            .prop_map(move |(first, mid, last)| {
                let mut a = vec![first];
                a.extend(mid);
                if p > 1 {
                    a[p - 1] = last;
                }
                a
            })
    })
}

fn rescale(alphas: &[f64], target: f64) -> Option<Vec<f64>> {
    let s: f64 = alphas.iter().sum();
    let out: Vec<f64> = alphas.iter().map(|a| a * target / s).collect();
    out.iter().all(|a| *a <= 1.0).then_some(out)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn regime_matches_perron_root(alphas in primitive_alphas(), target in prop_oneof![0.05f64..0.999, Just(1.0), 1.001f64..3.0]) {
        let Some(scaled) = rescale(&alphas, target) else { return Ok(()) };
        let c = Coefficients::new(&scaled).unwrap();
        let class = classify(&c).unwrap();
        let sum: f64 = scaled.iter().sum();
        let expected = if (sum - 1.0).abs() <= 1e-12 {
            Regime::Unstable
        } else if sum < 1.0 {
            Regime::Stable
        } else {
            Regime::Explosive
        };
        prop_assert_eq!(class.regime, expected);
        match expected {
            Regime::Stable => prop_assert!(class.rho < 1.0),
            Regime::Unstable => prop_assert!((class.rho - 1.0).abs() < 1e-9),
            Regime::Explosive => prop_assert!(class.rho > 1.0),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn perron_data_identities(alphas in primitive_alphas()) {
        let c = Coefficients::new(&alphas).unwrap();
        prop_assume!(gcd_support(&c).unwrap() == 1);
        let s = spectral_data(&c).unwrap();
        let a = companion(&c).unwrap().into_inner();
        let u = DVector::from_vec(s.u.clone());
        let v = DVector::from_vec(s.v.clone());
        let p = u.len();
        prop_assert!((&a * &u - s.rho * &u).amax() < 1e-9);
        prop_assert!((a.transpose() * &v - s.rho * &v).amax() < 1e-9);
        prop_assert!((u.sum() - 1.0).abs() < 1e-9);
        prop_assert!((u.dot(&v) - 1.0).abs() < 1e-9);
        let pi = DMatrix::from_fn(p, p, |i, j| s.pi[i][j]);
        prop_assert!((&pi * &pi - &pi).amax() < 1e-9);
        let g: f64 = alphas.iter().enumerate().map(|(k, a)| a * s.rho.powi(-(k as i32 + 1))).sum();
        prop_assert!((g - 1.0).abs() < 1e-10);

        let max_real = eigenvalues(&c)
            .unwrap()
            .iter()
            .filter(|z| z.im.abs() < 1e-7)
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((max_real - s.rho).abs() < 1e-9, "{} vs {}", max_real, s.rho);
    }

    #[test]
    fn power_weights_are_corner_of_matrix_powers(alphas in primitive_alphas()) {
        let c = Coefficients::new(&alphas).unwrap();
        let a = companion(&c).unwrap().into_inner();
        let w = power_weights(&c, 50);
        let mut power = DMatrix::<f64>::identity(a.nrows(), a.nrows());
        for (j, wj) in w.iter().enumerate() {
            prop_assert!((power[(0, 0)] - wj).abs() <= 1e-12 * wj.abs().max(1.0), "j = {}", j);
            power = &a * power;
        }
    }

    #[test]
    fn unit_root_projection_corner(alphas in primitive_alphas()) {
        let Some(scaled) = rescale(&alphas, 1.0) else { return Ok(()) };
        let c = Coefficients::new(&scaled).unwrap();
        let s = spectral_data(&c).unwrap();
        prop_assert!((s.rho - 1.0).abs() < 1e-10);
        prop_assert!((s.pi[0][0] - 1.0 / c.phi_prime_at_one()).abs() < 1e-10);
    }
}
