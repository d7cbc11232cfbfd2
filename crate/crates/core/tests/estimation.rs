//! CLS/WCLS behaviour on simulated data and on the Boston series.

use inar::data::boston;
use inar::estimate::{cls_fit, residual_acf, wcls_fit, Lags};
use inar::rng::RngStream;
use inar::simulate::simulate_path;
use inar::{validate, InnovationSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

#[test]
fn stable_second_order_fit_is_consistent() {
    let spec = validate(2, &[0.3, 0.2], InnovationSpec::Poisson { lambda: 2.0 }).unwrap();
    let path = simulate_path(&spec, 100_000, RngStream::new(1234, 0), false).unwrap();
    let lags: Lags = "1,2".parse().unwrap();
    for fit in [cls_fit(&path.counts, &lags).unwrap(), wcls_fit(&path.counts, &lags).unwrap()] {
        assert!((fit.alpha(1) - 0.3).abs() < 0.02, "{:?}", fit.alpha_hat);
        assert!((fit.alpha(2) - 0.2).abs() < 0.02, "{:?}", fit.alpha_hat);
        assert!((fit.mu_hat - 2.0).abs() < 0.1);
    }
}

#[test]
fn white_noise_acf_stays_in_band() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let xs: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let acf = residual_acf(&xs, 20).unwrap();
    assert!(acf.fraction_inside() >= 0.9, "{:?}", acf.values);
}

#[test]
fn boston_coefficients() {
    let series = boston();
    let lags: Lags = "1,12".parse().unwrap();
    let cls = cls_fit(&series.values, &lags).unwrap();
    let wcls = wcls_fit(&series.values, &lags).unwrap();
    // Independent normal-equation solution in double precision.
    assert!((cls.alpha(1) - 0.606941252525).abs() < 1e-8);
    assert!((cls.alpha(12) - 0.411985980783).abs() < 1e-8);
    assert!((cls.mu_hat - 14.970690469869).abs() < 1e-7);
    assert!((cls.se - 37.600588208832).abs() < 1e-6);
    assert!((wcls.alpha(1) - 0.682017482756).abs() < 1e-8);
    assert!((wcls.alpha(12) - 0.349691283644).abs() < 1e-8);
    assert!((wcls.mu_hat - 9.961215150297).abs() < 1e-7);
    assert!((wcls.se - 1.868320950735).abs() < 1e-8);
    assert_eq!(cls.sample_range, (13, 118));
    // Unit-root-like: both sums exceed one.
    assert!(cls.sigma > 1.0 && wcls.sigma > 1.0);
}

#[test]
fn parametric_bootstrap_covers_point_estimates() {
    let series = boston();
    let lags: Lags = "1,12".parse().unwrap();
    let fit = cls_fit(&series.values, &lags).unwrap();
    let mut alphas = vec![0.0; 12];
    alphas[0] = fit.alpha(1);
    alphas[11] = fit.alpha(12);
    let spec = validate(12, &alphas, InnovationSpec::Poisson { lambda: fit.mu_hat }).unwrap();
    let n = series.len();
    let boot: Vec<(f64, f64)> = (0..200u64)
        .into_par_iter()
        .filter_map(|r| {
            let path = simulate_path(&spec, n, RngStream::new(555, r), false).unwrap();
            cls_fit(&path.counts, &lags).ok().map(|f| (f.alpha(1), f.alpha(12)))
        })
        .collect();
    assert!(boot.len() >= 190);
    for (j, point) in [(0usize, fit.alpha(1)), (1, fit.alpha(12))] {
        let mut xs: Vec<f64> = boot.iter().map(|b| if j == 0 { b.0 } else { b.1 }).collect();
        xs.sort_by(f64::total_cmp);
        let lo = xs[(xs.len() as f64 * 0.025) as usize];
        let hi = xs[(xs.len() as f64 * 0.975) as usize];
        assert!(lo <= point && point <= hi, "coefficient {j}: {point} outside [{lo}, {hi}]");
    }
}
