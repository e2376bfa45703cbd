use std::f64::consts::{PI, TAU};

use nls_core::bootstrap::{
    mallows_d2, pilot_estimate, rescaled_residuals, resample_periodogram, Variant,
};
use nls_core::models::{simulate, simulate_coupled, theoretical_acov, Innovation, ModelSpec};
use nls_core::rng::stream_rng;
use nls_core::spectral::{
    estimate_from_periodogram, lag_window_estimate, oversampled_periodogram, periodogram,
    sample_acov, spectral_second_derivative, Window,
};
use nls_core::TimeSeries;
use proptest::prelude::*;

fn series_strategy(min: usize, max: usize) -> impl Strategy<Value = TimeSeries<f64>> {
    prop::collection::vec(-10.0f64..10.0, min..max).prop_map(|v| TimeSeries::new(v).unwrap())
}

fn window_strategy() -> impl Strategy<Value = Window> {
    prop::sample::select(Window::ALL.to_vec())
}

fn spec_strategy() -> impl Strategy<Value = ModelSpec> {
    let g = Innovation::standard_gaussian();
    prop_oneof![
        Just(ModelSpec::iid(g)),
        (-0.9f64..0.9).prop_map(move |p| ModelSpec::ar(vec![p], g)),
        (0.0f64..0.5, 0.0f64..0.4).prop_map(move |(a, b)| ModelSpec::expar(a, b, 1.0, g)),
        (0.01f64..0.5, 0.0f64..0.3, 0.0f64..0.6)
            .prop_map(move |(a0, a1, b1)| ModelSpec::garch(a0, vec![a1], vec![b1], g)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residuals_have_mean_one(x in series_strategy(16, 300), pilot_lag in 1usize..6) {
        prop_assume!(pilot_lag < x.len() / 2);
        let pilot = pilot_estimate(&x, Window::Parzen, pilot_lag).unwrap();
        if let Ok(res) = rescaled_residuals(&periodogram(&x), pilot.values()) {
            let mean = res.rescaled.iter().sum::<f64>() / res.len() as f64;
            prop_assert!((mean - 1.0).abs() < 1e-12, "mean {}", mean);
        }
    }

    #[test]
    fn resampled_zero_ordinate_vanishes(
        x in series_strategy(16, 200),
        seed in any::<u64>(),
        exponential in any::<bool>(),
    ) {
        let pilot = pilot_estimate(&x, Window::Parzen, 2).unwrap();
        let Ok(res) = rescaled_residuals(&periodogram(&x), pilot.values()) else {
            return Ok(());
        };
        let variant = if exponential { Variant::Exponential } else { Variant::Residual };
        let star = resample_periodogram(&pilot, &res, variant, &mut stream_rng(seed, 0)).unwrap();
        prop_assert_eq!(star.ordinate(0), 0.0);
        prop_assert!(star.ordinates().iter().all(|v| *v >= 0.0));
        for j in 1..=(x.len() / 2) as i64 {
            prop_assert_eq!(star.ordinate(j), star.ordinate(-j));
        }
    }

    #[test]
    fn mallows_is_a_metric(
        a in prop::collection::vec(-5.0f64..5.0, 1..40),
        b in prop::collection::vec(-5.0f64..5.0, 1..40),
        c in prop::collection::vec(-5.0f64..5.0, 1..40),
        shift in -3.0f64..3.0,
    ) {
        prop_assert!(mallows_d2(&a, &a).unwrap() < 1e-12);
        let ab = mallows_d2(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - mallows_d2(&b, &a).unwrap()).abs() < 1e-12);
        let ac = mallows_d2(&a, &c).unwrap();
        let cb = mallows_d2(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-9, "{} > {} + {}", ab, ac, cb);
        let moved: Vec<f64> = a.iter().map(|v| v + shift).collect();
        prop_assert!((mallows_d2(&a, &moved).unwrap() - shift.abs()).abs() < 1e-9);
    }

    #[test]
    fn oversampled_route_matches_direct_estimate(
        x in series_strategy(8, 160),
        window in window_strategy(),
        bn in 1usize..40,
        lambda in 0.0f64..PI,
    ) {
        prop_assume!(bn < x.len());
        let direct = lag_window_estimate(&x, window, bn, &[lambda]).unwrap().values[0];
        let via = estimate_from_periodogram(&oversampled_periodogram(&x), window, bn, lambda).unwrap();
        let r0 = sample_acov(&x, 0).unwrap();
        prop_assert!((direct - via).abs() <= 1e-9 * r0.max(1e-300), "{} vs {}", direct, via);
    }

    #[test]
    fn fourier_grid_inversion_is_circular(x in series_strategy(4, 200)) {
        let n = x.len();
        let p = periodogram(&x);
        let r0 = sample_acov(&x, 0).unwrap();
        for k in 0..n {
            let circular = sample_acov(&x, k as i64).unwrap()
                + if k == 0 { 0.0 } else { sample_acov(&x, (n - k) as i64).unwrap() };
            prop_assert!((p.inverse_acov(k as i64) - circular).abs() < 1e-9 * r0);
        }
    }

    #[test]
    fn oversampled_inversion_is_exact(x in series_strategy(4, 200)) {
        let n = x.len();
        let p = oversampled_periodogram(&x);
        let r0 = sample_acov(&x, 0).unwrap();
        for k in 0..n {
            let r = sample_acov(&x, k as i64).unwrap();
            prop_assert!((p.inverse_acov(k as i64) - r).abs() < 1e-9 * r0);
        }
    }

    #[test]
    fn parzen_estimate_is_nonnegative(
        x in series_strategy(8, 200),
        bn in 1usize..60,
        lambda in 0.0f64..PI,
    ) {
        prop_assume!(bn < x.len());
        for w in [Window::Parzen, Window::Bartlett] {
            let v = lag_window_estimate(&x, w, bn, &[lambda]).unwrap().values[0];
            prop_assert!(v >= -1e-12, "{:?} gave {}", w, v);
        }
    }

    #[test]
    fn windows_are_even_and_bounded(x in -2.0f64..2.0) {
        for w in Window::ALL {
            let a = w.eval(x);
            prop_assert_eq!(a, w.eval(-x));
            prop_assert!((-1e-15..=1.0).contains(&a));
            if x.abs() >= 1.0 {
                prop_assert_eq!(a, 0.0);
            }
        }
    }

    #[test]
    fn cosine_orthogonality(
        log_n in 3u32..10,
        j in 1usize..256,
        jp in 1usize..256,
        k in 0usize..512,
        h_frac in 0.0f64..0.25,
    ) {
        let n = 1usize << log_n;
        let (j, jp) = (1 + j % (n / 2 - 1), 1 + jp % (n / 2 - 1));
        let h = (h_frac * n as f64) as usize;
        let theta = |i: usize| TAU * i as f64 / n as f64;
        let sum: f64 = (0..n)
            .map(|t| {
                let kt = (k + t) as f64;
                (kt * theta(j)).cos() * ((kt + h as f64) * theta(jp)).cos()
            })
            .sum();
        let expected = if j == jp { n as f64 / 2.0 * (h as f64 * theta(j)).cos() } else { 0.0 };
        prop_assert!((sum - expected).abs() < 1e-8, "n={} j={} j'={} h={}: {} vs {}", n, j, jp, h, sum, expected);
    }

    #[test]
    fn second_derivative_is_even(phi in -0.9f64..0.9, lambda in 0.0f64..PI) {
        let acov = theoretical_acov(&ModelSpec::ar(vec![phi], Innovation::standard_gaussian()), 400).unwrap();
        let a = spectral_second_derivative(&acov, lambda);
        let b = spectral_second_derivative(&acov, -lambda);
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulation_is_reproducible(spec in spec_strategy(), seed in any::<u64>(), n in 2usize..300) {
        let a = simulate(&spec, n, 50, seed).unwrap();
        let b = simulate(&spec, n, 50, seed).unwrap();
        prop_assert_eq!(a.values(), b.values());
        prop_assert!(a.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn coupled_iid_paths_agree(seed in any::<u64>()) {
        let pair = simulate_coupled(&ModelSpec::iid(Innovation::standard_gaussian()), 50, seed).unwrap();
        prop_assert!(pair.abs_moment_trace(2.0).iter().all(|d| *d == 0.0));
    }

    #[test]
    fn single_precision_tracks_double(x in series_strategy(32, 256), bn in 1usize..16, lambda in 0.0f64..PI) {
        let x32 = x.cast::<f32>();
        let a = lag_window_estimate(&x, Window::Parzen, bn, &[lambda]).unwrap().values[0];
        let b = lag_window_estimate(&x32, Window::Parzen, bn, &[lambda]).unwrap().values[0];
        let r0 = sample_acov(&x, 0).unwrap();
        prop_assert!((a - b as f64).abs() < 1e-4 * r0, "{} vs {}", a, b);
    }
}
