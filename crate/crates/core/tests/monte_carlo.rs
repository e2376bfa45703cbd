//! Seeded Monte Carlo checks. Every seed is fixed, so each test is
//! deterministic; the tolerances are set so that a correct implementation
//! passes with high probability for any seed.

use std::f64::consts::{FRAC_PI_3, PI, TAU};

use nls_core::experiments::{block_sum_scaling, oracle_spectrum, OracleSettings};
use nls_core::gmc::estimate_decay;
use nls_core::models::{simulate, theoretical_acov, theoretical_spectrum, Innovation, ModelSpec};
use nls_core::spectral::{
    default_grid, expected_estimate, frequency_grid, lag_window_estimate,
    normalized_periodogram_ks, sample_acov, Window,
};
use nls_core::stats;

const SEED: u64 = 7_700_113;

fn g() -> Innovation {
    Innovation::standard_gaussian()
}

#[test]
fn estimate_mean_matches_exact_expectation() {
    let spec = ModelSpec::ar(vec![0.5], g());
    let (n, bn, reps) = (512, 16, 400);
    let lambdas = [0.0, FRAC_PI_3, 2.0 * FRAC_PI_3, PI];
    let acov = theoretical_acov(&spec, bn).unwrap();
    let mut draws = vec![Vec::with_capacity(reps); lambdas.len()];
    for r in 0..reps {
        let x = simulate(&spec, n, 500, SEED + r as u64).unwrap();
        let est = lag_window_estimate(&x, Window::Parzen, bn, &lambdas).unwrap();
        for (d, v) in draws.iter_mut().zip(est.values) {
            d.push(v);
        }
    }
    for (l, d) in lambdas.iter().zip(&draws) {
        let exact = expected_estimate(&acov, n, Window::Parzen, bn, *l).unwrap();
        let (m, se) = (stats::mean(d), stats::std_error(d));
        assert!((m - exact).abs() < 3.0 * se, "lambda {l}: mean {m}, exact {exact}, se {se}");
    }
}

#[test]
fn white_noise_periodogram_is_exponential() {
    let spec = ModelSpec::iid(g());
    let good = (0..50)
        .filter(|r| {
            let x = simulate(&spec, 4096, 0, SEED ^ (r + 1)).unwrap();
            normalized_periodogram_ks(&x, |_| 1.0 / TAU).unwrap() < 0.05
        })
        .count();
    assert!(good >= 45, "{good}/50 runs below 0.05");
}

#[test]
fn garch_estimate_is_flat() {
    let spec = ModelSpec::garch(0.1, vec![0.1], vec![0.8], g());
    let grid = frequency_grid(65);
    let f = 1.0 / TAU;
    let good = (0..20)
        .filter(|r| {
            let x = simulate(&spec, 1 << 14, 1000, SEED + 100 + r).unwrap();
            let est = lag_window_estimate(&x, Window::Parzen, 32, &grid).unwrap();
            est.values.iter().all(|v| (v - f).abs() <= 0.15 * f)
        })
        .count();
    assert!(good >= 18, "{good}/20 seeds within 15%");
}

#[test]
fn oracle_of_white_noise_is_flat() {
    let settings = OracleSettings {
        n_oracle: 1 << 14,
        reps: 16,
        ..OracleSettings::default()
    };
    let o = oracle_spectrum(&ModelSpec::iid(g()), &settings, SEED).unwrap();
    for l in frequency_grid(33) {
        let (v, se) = (o.eval(l), o.std_error(l));
        assert!((v - 1.0 / TAU).abs() < 3.0 * se, "lambda {l}: {v} (se {se})");
    }
}

#[test]
fn oracle_tracks_the_ar1_spectrum() {
    let spec = ModelSpec::ar(vec![0.5], g());
    let o = oracle_spectrum(&spec, &OracleSettings::default(), SEED).unwrap();
    for l in default_grid() {
        let (v, se) = (o.eval(l), o.std_error(l));
        let f = theoretical_spectrum(&spec, l).unwrap();
        assert!((v - f).abs() < 3.0 * se, "lambda {l}: {v} vs {f} (se {se})");
    }
}

#[test]
fn expar_oracle_is_a_spectral_density() {
    let spec = ModelSpec::expar(0.5, 0.3, 1.0, g());
    let settings = OracleSettings {
        n_oracle: 1 << 15,
        reps: 8,
        ..OracleSettings::default()
    };
    let o = oracle_spectrum(&spec, &settings, SEED).unwrap();
    let grid = frequency_grid(1025);
    let values: Vec<f64> = grid.iter().map(|&l| o.eval(l)).collect();
    assert!(values.iter().all(|v| *v > 0.0));
    for &l in &grid[..64] {
        assert_eq!(o.eval(l), o.eval(-l));
    }
    // int_{-pi}^{pi} f = r(0), by the trapezoid rule on [0, pi] doubled
    let h = PI / 1024.0;
    let half = h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[1024]));
    let x = simulate(&spec, 1 << 16, 1000, SEED + 1).unwrap();
    let r0 = sample_acov(&x, 0).unwrap();
    assert!((2.0 * half / r0 - 1.0).abs() < 0.05, "integral {} vs r(0) {r0}", 2.0 * half);
}

#[test]
fn block_sums_grow_linearly() {
    let spec = ModelSpec::ar(vec![0.5], g());
    let sizes = [(1024, 8), (1024, 32), (4096, 16), (4096, 64)];
    let report = block_sum_scaling(&spec, Window::Parzen, FRAC_PI_3, &sizes, 300, SEED).unwrap();
    assert!((report.fit.slope - 1.0).abs() < 0.2, "slope {}", report.fit.slope);
}

#[test]
fn ar1_contraction_rate() {
    let spec = ModelSpec::ar(vec![0.5], g());
    let lags: Vec<usize> = (1..=20).collect();
    let r = estimate_decay(&spec, 2.0, &lags, 2000, SEED).unwrap();
    assert!((r.rho_hat - 0.25).abs() < 0.05, "rho {}", r.rho_hat);
}
