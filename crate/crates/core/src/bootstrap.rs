//! Residual-based frequency-domain bootstrap for lag-window estimates.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::scalar::{CompensatedSum, Scalar};
use crate::series::TimeSeries;
use crate::spectral::{
    lag_window_estimate, periodogram, Periodogram, PeriodogramKernel, SpectralEstimate, Window,
};

/// How bootstrap multipliers `e*_j` are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Uniformly with replacement from the rescaled residuals.
    #[default]
    Residual,
    /// I.i.d. standard exponential.
    Exponential,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Residual => "residual",
            Variant::Exponential => "exponential",
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "residual" => Ok(Variant::Residual),
            "exponential" | "exp" => Ok(Variant::Exponential),
            other => Err(Error::Config(format!(
                "unknown bootstrap variant {other:?} (expected residual or exponential)"
            ))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub window: Window,
    /// Truncation lag `B_n` of the estimator.
    pub bn: usize,
    /// Truncation lag of the oversmoothed pilot; must be below `bn`.
    pub bn_pilot: usize,
    pub variant: Variant,
    pub n_boot: usize,
    pub seed: u64,
}

impl BootstrapConfig {
    /// Checks that do not depend on the data, plus `bn < n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        self.window.require_c2()?;
        self.window.require_nonneg()?;
        if self.bn_pilot < 1 {
            return Err(Error::Bandwidth("pilot truncation lag must be at least 1".into()));
        }
        if self.bn_pilot >= self.bn {
            return Err(Error::Bandwidth(format!(
                "pilot must be smoother than the estimate: need pilot lag {} < lag {}",
                self.bn_pilot, self.bn
            )));
        }
        if self.bn >= n {
            return Err(Error::Bandwidth(format!(
                "truncation lag {} must be below the sample size {n}",
                self.bn
            )));
        }
        if self.n_boot < 1 {
            return Err(Error::param("need at least one bootstrap replicate"));
        }
        Ok(())
    }
}

/// Oversmoothed pilot `f~`, stored at the Fourier frequencies
/// `2 pi j / n`, `j = 0..=n/2`, with an evaluator at any frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Pilot<T = f64> {
    pub window: Window,
    pub bn: usize,
    pub n: usize,
    /// `r(k) a(k/B)` for `k = 0..=B`.
    weighted_acov: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> Pilot<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `f~(lambda)`, clamped at zero against rounding.
    pub fn eval(&self, lambda: f64) -> T {
        let est = SpectralEstimate::<T>::from_weighted_acov(&self.weighted_acov, lambda);
        est.max(T::zero())
    }
}

impl<T: Scalar> SpectralEstimate<T> {
    fn from_weighted_acov(w: &[T], lambda: f64) -> T {
        let mut acc = CompensatedSum::new();
        for (k, &v) in w.iter().enumerate().skip(1) {
            acc.add(v * T::of((k as f64 * lambda % std::f64::consts::TAU).cos()));
        }
        (w[0] + T::of(2.0) * acc.total()) / T::of(std::f64::consts::TAU)
    }
}

/// Lag-window pilot with truncation lag `bn_pilot`. The window must have a
/// nonnegative spectral window so that `f~ >= 0`.
pub fn pilot_estimate<T: Scalar>(series: &TimeSeries<T>, window: Window, bn_pilot: usize) -> Result<Pilot<T>> {
    window.require_nonneg()?;
    let n = series.len();
    let grid: Vec<f64> = (0..=n / 2).map(|j| std::f64::consts::TAU * j as f64 / n as f64).collect();
    let est = lag_window_estimate(series, window, bn_pilot, &grid)?;
    let a = window.weights::<T>(bn_pilot);
    let weighted_acov = (0..=bn_pilot)
        .map(|k| crate::spectral::sample_acov(series, k as i64).map(|r| r * a[k]))
        .collect::<Result<Vec<T>>>()?;
    Ok(Pilot {
        window,
        bn: bn_pilot,
        n,
        weighted_acov,
        values: est.values.into_iter().map(|v| v.max(T::zero())).collect(),
    })
}

/// Periodogram-to-pilot ratios `I_j / f~_j`, `j = 1..=floor(n/2)`, and the
/// same ratios divided by their mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSet<T = f64> {
    pub raw: Vec<T>,
    pub rescaled: Vec<T>,
}

impl<T: Scalar> ResidualSet<T> {
    pub fn len(&self) -> usize {
        self.rescaled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rescaled.is_empty()
    }

    pub fn diagnostics(&self) -> ResidualDiagnostics {
        let v: Vec<f64> = self.rescaled.iter().map(|x| x.to_f64_lossy()).collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let variance = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let fourth_moment = v.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        ResidualDiagnostics {
            mean,
            variance,
            fourth_moment,
        }
    }
}

/// Moments of the rescaled residuals; an exponential law has variance 1 and
/// central fourth moment 9.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualDiagnostics {
    pub mean: f64,
    pub variance: f64,
    pub fourth_moment: f64,
}

/// Relative floor below which a pilot ordinate counts as degenerate.
pub const PILOT_FLOOR: f64 = 1e-12;

/// `I_j / f~_j` for `j = 1..=floor(n/2)` and their rescaling to mean one.
pub fn rescaled_residuals<T: Scalar>(pgram: &Periodogram<T>, pilot: &[T]) -> Result<ResidualSet<T>> {
    let big_n = pgram.n() / 2;
    if pilot.len() < big_n + 1 || !pgram.is_fourier_grid() {
        return Err(Error::param("pilot and periodogram must share the Fourier grid"));
    }
    if big_n == 0 {
        return Err(Error::Empty("no nonzero Fourier frequencies"));
    }
    let max = pilot[1..=big_n].iter().copied().fold(T::zero(), T::max);
    let floor = max * T::of(PILOT_FLOOR);
    let mut raw = Vec::with_capacity(big_n);
    for j in 1..=big_n {
        if pilot[j] <= floor {
            return Err(Error::DegeneratePilot {
                index: j,
                value: pilot[j].to_f64_lossy(),
                floor: floor.to_f64_lossy(),
            });
        }
        raw.push(pgram.ordinates()[j] / pilot[j]);
    }
    let mean = crate::scalar::compensated_sum(raw.iter().copied()) / T::of_usize(big_n);
    if !(mean > T::zero()) {
        return Err(Error::param("all periodogram ordinates vanish; residuals cannot be rescaled"));
    }
    let rescaled = raw.iter().map(|&e| e / mean).collect();
    Ok(ResidualSet { raw, rescaled })
}

/// Bootstrap ordinates `I*_j = f~_j e*_j` for `j = 1..=n/2` and `I*_0 = 0`,
/// returned as a Fourier-grid periodogram (so `I*_{-j} = I*_j`).
pub fn resample_periodogram<T: Scalar, R: Rng + ?Sized>(
    pilot: &Pilot<T>,
    residuals: &ResidualSet<T>,
    variant: Variant,
    rng: &mut R,
) -> Result<Periodogram<T>> {
    let ordinates = resample_ordinates(pilot.values(), residuals, variant, rng)?;
    Periodogram::from_ordinates(pilot.n, pilot.n, ordinates)
}

fn resample_ordinates<T: Scalar, R: Rng + ?Sized>(
    pilot: &[T],
    residuals: &ResidualSet<T>,
    variant: Variant,
    rng: &mut R,
) -> Result<Vec<T>> {
    if variant == Variant::Residual && residuals.is_empty() {
        return Err(Error::Empty("residual set"));
    }
    let mut out = Vec::with_capacity(pilot.len());
    out.push(T::zero());
    for &f in &pilot[1..] {
        let e = match variant {
            Variant::Residual => residuals.rescaled[rng.random_range(0..residuals.len())],
            Variant::Exponential => T::of(Exp1.sample(rng)),
        };
        out.push(f * e);
    }
    Ok(out)
}

/// Samples of `g*(lambda) = sqrt(n / B_n) (f*_n(lambda) - f~(lambda))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDistribution<T = f64> {
    pub samples: Vec<T>,
    pub lambda: f64,
    /// `f~(lambda)`.
    pub pilot_at_lambda: T,
    /// `f_n(lambda)` of the data.
    pub estimate_at_lambda: T,
    pub config: BootstrapConfig,
    pub n: usize,
    pub diagnostics: ResidualDiagnostics,
}

impl<T: Scalar> BootstrapDistribution<T> {
    /// `g* / f~(lambda)`.
    pub fn normalized(&self) -> Vec<T> {
        self.samples.iter().map(|&g| g / self.pilot_at_lambda).collect()
    }

    pub fn samples_f64(&self) -> Vec<f64> {
        self.samples.iter().map(|v| v.to_f64_lossy()).collect()
    }
}

/// Run the bootstrap at frequency `lambda`. Replicate `r` draws from stream
/// `r` of `config.seed`; replicates run in parallel.
pub fn bootstrap_distribution<T: Scalar>(
    series: &TimeSeries<T>,
    config: &BootstrapConfig,
    lambda: f64,
) -> Result<BootstrapDistribution<T>> {
    let n = series.len();
    config.validate(n)?;
    if !(0.0..=std::f64::consts::PI).contains(&lambda) {
        return Err(Error::param(format!("frequency {lambda} is outside [0, pi]")));
    }
    let pgram = periodogram(series);
    let pilot = pilot_estimate(series, config.window, config.bn_pilot)?;
    let residuals = rescaled_residuals(&pgram, pilot.values())?;
    let kernel = PeriodogramKernel::<T>::new(n, n, config.window, config.bn, lambda)?;
    let centre = pilot.eval(lambda);
    let scale = T::of((n as f64 / config.bn as f64).sqrt());

    let samples = (0..config.n_boot)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(config.seed, r as u64);
            let ord = resample_ordinates(pilot.values(), &residuals, config.variant, &mut rng)?;
            Ok(scale * (kernel.apply(&ord) - centre))
        })
        .collect::<Result<Vec<T>>>()?;
    let estimate = lag_window_estimate(series, config.window, config.bn, &[lambda])?;
    Ok(BootstrapDistribution {
        samples,
        lambda,
        pilot_at_lambda: centre,
        estimate_at_lambda: estimate.values[0],
        config: *config,
        n,
        diagnostics: residuals.diagnostics(),
    })
}

/// Mallows (`L^2`-Wasserstein) distance between two empirical laws.
pub fn mallows_d2<T: Scalar>(a: &[T], b: &[T]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("sample for the Mallows distance"));
    }
    let sorted = |x: &[T]| {
        let mut v: Vec<f64> = x.iter().map(|v| v.to_f64_lossy()).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (a, b) = (sorted(a), sorted(b));
    if a.len() == b.len() {
        let s: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum();
        return Ok((s / a.len() as f64).sqrt());
    }
    // both quantile functions are step functions; walk the merged breakpoints
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0.0;
    let mut acc = 0.0;
    while i < na && j < nb {
        let next_a = (i + 1) as f64 / na as f64;
        let next_b = (j + 1) as f64 / nb as f64;
        let next = next_a.min(next_b);
        acc += (next - u) * (a[i] - b[j]).powi(2);
        u = next;
        // compare in integer arithmetic to advance both on shared breakpoints
        let (ka, kb) = ((i + 1) * nb, (j + 1) * na);
        if ka <= kb {
            i += 1;
        }
        if kb <= ka {
            j += 1;
        }
    }
    Ok(acc.sqrt())
}

/// `B_n = round(scale n^{1/5})` and `B~_n = round(pilot_scale n^{0.15})`,
/// adjusted so that `1 <= B~_n < B_n < n`.
pub fn scaled_bandwidths(n: usize, scale: f64, pilot_scale: f64) -> Result<(usize, usize)> {
    if !(scale > 0.0 && pilot_scale > 0.0) {
        return Err(Error::Bandwidth("bandwidth constants must be positive".into()));
    }
    let nf = n as f64;
    let bn = ((scale * nf.powf(0.2)).round() as usize).min(n.saturating_sub(1));
    let mut pilot = (pilot_scale * nf.powf(0.15)).round() as usize;
    if pilot >= bn {
        pilot = bn.saturating_sub(1);
    }
    if pilot < 1 {
        return Err(Error::Bandwidth(format!(
            "n = {n} is too small to separate the estimate and pilot truncation lags"
        )));
    }
    Ok((bn, pilot))
}

/// Unit-constant bandwidths; requires `n >= 32`.
pub fn default_bandwidths(n: usize) -> Result<(usize, usize)> {
    if n < 32 {
        return Err(Error::Bandwidth(format!("default bandwidths need n >= 32, got {n}")));
    }
    scaled_bandwidths(n, 1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{simulate, Innovation, ModelSpec};
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    fn white(seed: u64, n: usize) -> TimeSeries<f64> {
        simulate(&ModelSpec::iid(Innovation::standard_gaussian()), n, 0, seed).unwrap()
    }

    fn config(bn: usize, bn_pilot: usize, variant: Variant, n_boot: usize) -> BootstrapConfig {
        BootstrapConfig {
            window: Window::Parzen,
            bn,
            bn_pilot,
            variant,
            n_boot,
            seed: 42,
        }
    }

    #[test]
    fn bandwidth_examples() {
        assert_eq!(default_bandwidths(2048).unwrap(), (5, 3));
        assert_eq!(default_bandwidths(100_000).unwrap(), (10, 6));
        let (b, p) = default_bandwidths(32).unwrap();
        assert!(1 <= p && p < b);
        assert!(default_bandwidths(31).is_err());
        assert!(scaled_bandwidths(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn config_ordering() {
        assert!(matches!(config(4, 8, Variant::Residual, 10).validate(100), Err(Error::Bandwidth(_))));
        assert!(matches!(config(4, 4, Variant::Residual, 10).validate(100), Err(Error::Bandwidth(_))));
        assert!(config(8, 4, Variant::Residual, 10).validate(100).is_ok());
        assert!(matches!(config(8, 4, Variant::Residual, 10).validate(8), Err(Error::Bandwidth(_))));
        let mut c = config(8, 4, Variant::Residual, 10);
        c.window = Window::Bartlett;
        assert!(matches!(c.validate(100), Err(Error::NotLocallyQuadratic(_))));
        c.window = Window::TukeyHanning;
        assert!(matches!(c.validate(100), Err(Error::NegativeSpectralWindow(_))));
    }

    #[test]
    fn pilot_matches_lag_window_and_its_evaluator() {
        let s = white(1, 300);
        let p = pilot_estimate(&s, Window::Parzen, 6).unwrap();
        let grid: Vec<f64> = (0..=150).map(|j| TAU * j as f64 / 300.0).collect();
        let est = lag_window_estimate(&s, Window::Parzen, 6, &grid).unwrap();
        for (j, (a, b)) in p.values().iter().zip(&est.values).enumerate() {
            assert!((a - b).abs() <= 1e-12 * b.abs());
            assert!((p.eval(grid[j]) - b).abs() <= 1e-12 * b.abs());
        }
        assert!(pilot_estimate(&s, Window::TukeyHanning, 6).is_err());
    }

    #[test]
    fn long_white_noise_pilot_is_flat() {
        let s = white(2, 1 << 15);
        let p = pilot_estimate(&s, Window::Parzen, 8).unwrap();
        for v in p.values() {
            assert!((v * TAU - 1.0).abs() < 0.15);
        }
    }

    #[test]
    fn zero_series_has_degenerate_pilot() {
        let s = TimeSeries::new(vec![0.0; 64]).unwrap();
        let p = pilot_estimate(&s, Window::Parzen, 4).unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0));
        let e = rescaled_residuals(&periodogram(&s), p.values()).unwrap_err();
        assert!(matches!(e, Error::DegeneratePilot { .. }));
    }

    #[test]
    fn residual_examples() {
        let pilot = vec![9.0, 1.0, 2.0, 0.5, 4.0];
        let p = Periodogram::from_ordinates(8, 8, vec![0.0, 1.0, 2.0, 0.5, 4.0]).unwrap();
        let r = rescaled_residuals(&p, &pilot).unwrap();
        assert!(r.rescaled.iter().all(|&e| e == 1.0));

        let p = Periodogram::from_ordinates(8, 8, vec![0.0, 2.0, 0.0, 0.5, 4.0]).unwrap();
        let r = rescaled_residuals(&p, &pilot).unwrap();
        assert_eq!(r.raw, vec![2.0, 0.0, 1.0, 1.0]);
        assert_eq!(r.rescaled, r.raw);

        let bad = vec![1.0, 1.0, 0.0, 1.0, 1.0];
        assert!(matches!(
            rescaled_residuals(&p, &bad),
            Err(Error::DegeneratePilot { index: 2, .. })
        ));
    }

    #[test]
    fn all_ones_residuals_reproduce_the_pilot() {
        let s = white(3, 128);
        let pilot = pilot_estimate(&s, Window::Parzen, 3).unwrap();
        let ones = ResidualSet {
            raw: vec![1.0; 64],
            rescaled: vec![1.0; 64],
        };
        let mut rng = stream_rng(0, 0);
        let p = resample_periodogram(&pilot, &ones, Variant::Residual, &mut rng).unwrap();
        assert_eq!(p.ordinates()[0], 0.0);
        assert_eq!(&p.ordinates()[1..], &pilot.values()[1..]);
    }

    #[test]
    fn exponential_multipliers_are_conditionally_unbiased() {
        let s = white(4, 64);
        let pilot = pilot_estimate(&s, Window::Parzen, 3).unwrap();
        let empty = ResidualSet { raw: vec![], rescaled: vec![] };
        let draws = 10_000;
        let mut sums = vec![0.0; 33];
        let mut sq = vec![0.0; 33];
        let mut rng = stream_rng(5, 0);
        for _ in 0..draws {
            let p = resample_periodogram(&pilot, &empty, Variant::Exponential, &mut rng).unwrap();
            for (j, v) in p.ordinates().iter().enumerate() {
                sums[j] += v;
                sq[j] += v * v;
            }
        }
        assert_eq!(sums[0], 0.0);
        for j in 1..=32 {
            let m = sums[j] / draws as f64;
            let se = ((sq[j] / draws as f64 - m * m) / draws as f64).sqrt();
            assert!((m - pilot.values()[j]).abs() < 3.5 * se, "j={j}");
        }
        let mut rng = stream_rng(5, 0);
        assert!(resample_periodogram(&pilot, &empty, Variant::Residual, &mut rng).is_err());
    }

    #[test]
    fn single_replicate_with_unit_residuals_is_deterministic() {
        // all residuals equal one when the periodogram is proportional to the pilot;
        // check the pipeline against a hand composition instead
        let s = white(6, 256);
        let c = config(12, 5, Variant::Residual, 1);
        let d = bootstrap_distribution(&s, &c, PI / 3.0).unwrap();
        let pilot = pilot_estimate(&s, Window::Parzen, 5).unwrap();
        let res = rescaled_residuals(&periodogram(&s), pilot.values()).unwrap();
        let mut rng = stream_rng(42, 0);
        let p = resample_periodogram(&pilot, &res, Variant::Residual, &mut rng).unwrap();
        let f_star = crate::spectral::estimate_from_periodogram(&p, Window::Parzen, 12, PI / 3.0).unwrap();
        let g = (256.0f64 / 12.0).sqrt() * (f_star - pilot.eval(PI / 3.0));
        assert_relative_eq!(d.samples[0], g, max_relative = 1e-12);
    }

    #[test]
    fn deterministic_and_parallel_safe() {
        let s = white(7, 512);
        let c = config(10, 4, Variant::Residual, 200);
        let a = bootstrap_distribution(&s, &c, 1.0).unwrap();
        let b = bootstrap_distribution(&s, &c, 1.0).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c1 = pool.install(|| bootstrap_distribution(&s, &c, 1.0).unwrap());
        assert_eq!(a, c1);
    }

    #[test]
    fn white_noise_bootstrap_variance() {
        let s = white(8, 2048);
        let w = Window::Parzen;
        for (lambda, factor, tol) in [(PI / 2.0, 1.0, 0.25), (0.0, 2.0, 0.30)] {
            let c = config(16, 6, Variant::Residual, 400);
            let d = bootstrap_distribution(&s, &c, lambda).unwrap();
            let var = crate::stats::variance(&d.samples);
            let sigma2 = factor * d.pilot_at_lambda.powi(2) * w.sq_integral();
            assert!((var / sigma2 - 1.0).abs() < tol, "lambda={lambda}: {}", var / sigma2);
        }
    }

    #[test]
    fn mallows_examples() {
        assert_eq!(mallows_d2(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mallows_d2(&[1.5], &[-2.0]).unwrap(), 3.5);
        assert_relative_eq!(mallows_d2(&[0.0, 1.0], &[0.3, 1.3]).unwrap(), 0.3, max_relative = 1e-15);
        // {0, 1} against {0, 0, 1, 1} is the same law
        assert_eq!(mallows_d2(&[0.0, 1.0], &[0.0, 0.0, 1.0, 1.0]).unwrap(), 0.0);
        // {0} against {0, 1}: half the mass moves by one
        assert_relative_eq!(mallows_d2(&[0.0], &[0.0, 1.0]).unwrap(), 0.5f64.sqrt());
        assert!(mallows_d2::<f64>(&[], &[1.0]).is_err());
    }
}
