//! Euler simulation of the limit diffusion as an oracle for the gamma
//! marginal and for the centred equation.

use inar::cir::{self, euler_ensemble, euler_ensemble_m, exact_marginal, params_from_model, params_m, CirParams};
use inar::experiment::gamma_oracle;
use inar::stats::{ks_statistic, ks_two_sample, ks_two_sample_critical, mean_and_se};
use inar::{validate, InnovationSpec};

fn flagship() -> inar::ModelSpec {
    validate(2, &[0.5, 0.5], InnovationSpec::Poisson { lambda: 1.0 }).unwrap()
}

#[test]
fn gamma_moments_match_euler_paths() {
    let params = params_from_model(&flagship()).unwrap();
    let grid = [0.5, 1.0, 2.0];
    let e = euler_ensemble(params, &grid, 10_000, 1e-3, 17).unwrap();
    for (j, &t) in grid.iter().enumerate() {
        let law = exact_marginal(params, t).unwrap();
        let xs = e.column(j);
        let (mean, mean_se) = mean_and_se(&xs);
        let m = xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / m;
        let var_se = ((m4 - var * var) / m).sqrt();
        assert!((mean - law.mean()).abs() < 4.0 * mean_se, "t={t}: mean {mean} vs {}", law.mean());
        assert!((var - law.variance()).abs() < 4.0 * var_se, "t={t}: var {var} vs {}", law.variance());
    }
}

#[test]
fn euler_paths_agree_with_gamma_law() {
    let params = CirParams::new(2.0 / 3.0, 2.0 / 9.0).unwrap();
    for row in gamma_oracle(params, &[1.0], 4000, 1e-3, 5).unwrap() {
        assert!(row.passes(), "{row:?}");
    }
}

#[test]
fn centred_equation_matches_affine_transform() {
    let spec = flagship();
    let (p, m) = (params_from_model(&spec).unwrap(), params_m(&spec).unwrap());
    let phi1 = spec.coefficients().phi_prime_at_one();
    let reps = 2000;
    let x = euler_ensemble(p, &[1.0], reps, 1e-3, 101).unwrap();
    let direct = euler_ensemble_m(m, &[1.0], reps, 1e-3, 202).unwrap();
    let mapped: Vec<f64> = x.column(0).iter().map(|v| phi1 * v - m.mu * 1.0).collect();
    let d = ks_two_sample(&mapped, &direct.column(0));
    assert!(d < ks_two_sample_critical(reps, reps), "two-sample KS {d}");
}

#[test]
fn negative_excursions_shrink_with_step() {
    // Dimension 4a/b2 = 0.2, so the diffusion touches zero often.
    let params = CirParams::new(0.1, 2.0).unwrap();
    let fractions: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&dt| euler_ensemble(params, &[1.0], 200, dt, 3).unwrap().negative_fraction())
        .collect();
    assert!(fractions[0] > fractions[1] && fractions[1] > fractions[2], "{fractions:?}");
    assert!(fractions[0] > 0.0);
}

#[test]
fn halving_the_step_moves_toward_gamma_law() {
    let params = CirParams::new(2.0 / 3.0, 2.0 / 9.0).unwrap();
    let law = exact_marginal(params, 1.0).unwrap();
    let mean_ks = |dt: f64| {
        (0..5u64)
            .map(|seed| {
                let e = euler_ensemble(params, &[1.0], 10_000, dt, 40 + seed).unwrap();
                ks_statistic(&e.column(0), |x| law.cdf(x))
            })
            .sum::<f64>()
            / 5.0
    };
    let ks: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&dt| mean_ks(dt)).collect();
    assert!(ks[0] > ks[1] && ks[1] > ks[2], "{ks:?}");
}

#[test]
fn centred_equation_is_zero_without_diffusion() {
    let m = cir::MParams { mu: 3.0, c: 0.0 };
    let e = euler_ensemble_m(m, &[0.5, 1.0], 10, 1e-2, 0).unwrap();
    assert!(e.values.iter().flatten().all(|&v| v.abs() < 1e-12));
}
