use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::fourier::phase;
use super::periodogram::{acov_unchecked, periodogram, Periodogram};
use super::window::Window;
use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Scalar};
use crate::series::TimeSeries;
use crate::stats::ks_statistic;

/// Number of points in the default frequency grid on `[0, pi]`.
pub const DEFAULT_GRID_POINTS: usize = 257;

/// `points` equispaced frequencies on `[0, pi]`, endpoints included.
pub fn frequency_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| PI * i as f64 / (points - 1) as f64).collect(),
    }
}

pub fn default_grid() -> Vec<f64> {
    frequency_grid(DEFAULT_GRID_POINTS)
}

/// Lag-window estimate `f_n` evaluated on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate<T = f64> {
    pub lambdas: Vec<f64>,
    pub values: Vec<T>,
    /// Truncation lag `B_n`.
    pub bn: usize,
    pub window: Window,
    pub n: usize,
}

pub(crate) fn check_bandwidth(bn: usize, n: usize) -> Result<()> {
    if bn < 1 {
        return Err(Error::Bandwidth("truncation lag must be at least 1".into()));
    }
    if bn >= n {
        return Err(Error::Bandwidth(format!(
            "truncation lag {bn} must be below the sample size {n}"
        )));
    }
    Ok(())
}

/// `(1/2pi) [w_0 + 2 sum_{k=1}^{B} w_k cos(k lambda)]`.
fn cosine_series<T: Scalar>(w: &[T], lambda: f64) -> T {
    let mut acc = CompensatedSum::new();
    for (k, &v) in w.iter().enumerate().skip(1) {
        acc.add(v * T::of(phase(k, lambda).cos()));
    }
    (w[0] + T::of(2.0) * acc.total()) / T::of(TAU)
}

/// `f_n(lambda) = (1/2pi) [r(0) + 2 sum_{k=1}^{B} r(k) a(k/B) cos(k lambda)]`
/// at each grid frequency.
pub fn lag_window_estimate<T: Scalar>(
    series: &TimeSeries<T>,
    window: Window,
    bn: usize,
    lambdas: &[f64],
) -> Result<SpectralEstimate<T>> {
    let n = series.len();
    check_bandwidth(bn, n)?;
    let a = window.weights::<T>(bn);
    let w: Vec<T> = (0..=bn)
        .map(|k| acov_unchecked(series.values(), k) * a[k])
        .collect();
    Ok(SpectralEstimate {
        lambdas: lambdas.to_vec(),
        values: lambdas.iter().map(|&l| cosine_series(&w, l)).collect(),
        bn,
        window,
        n,
    })
}

/// Weights `v_j` such that `f_n(lambda) = sum_{j=0}^{m/2} v_j I_j` for
/// ordinates on an `m`-point grid:
/// `v_j = mult_j W(lambda - omega_j) / m`, where `W` is the spectral window.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodogramKernel<T = f64> {
    pub lambda: f64,
    pub grid_len: usize,
    weights: Vec<T>,
}

impl<T: Scalar> PeriodogramKernel<T> {
    pub fn new(grid_len: usize, n: usize, window: Window, bn: usize, lambda: f64) -> Result<Self> {
        check_bandwidth(bn, n)?;
        let a = window.weights::<f64>(bn);
        let spectral = |u: f64| {
            let mut acc = CompensatedSum::<f64>::new();
            for (k, &ak) in a.iter().enumerate().skip(1) {
                acc.add(ak * (k as f64 * u).cos());
            }
            1.0 + 2.0 * acc.total()
        };
        let m = grid_len as f64;
        let weights = (0..=grid_len / 2)
            .map(|j| {
                let w = TAU * j as f64 / m;
                // I_{-j} = I_j, so the two symmetric terms share one ordinate
                let both = if Periodogram::<T>::multiplicity(grid_len, j) == 2 {
                    spectral((lambda - w) % TAU) + spectral((lambda + w) % TAU)
                } else {
                    spectral((lambda - w) % TAU)
                };
                T::of(both / m)
            })
            .collect();
        Ok(Self {
            lambda,
            grid_len,
            weights,
        })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `sum_j v_j I_j` over stored ordinates.
    pub fn apply(&self, ordinates: &[T]) -> T {
        debug_assert_eq!(ordinates.len(), self.weights.len());
        let mut acc = CompensatedSum::new();
        for (w, i) in self.weights.iter().zip(ordinates) {
            acc.add(*w * *i);
        }
        acc.total()
    }
}

/// `f_n(lambda) = (1/m) sum_{j} I_j sum_{|k|<=B} a(k/B) e^{-ik(lambda - omega_j)}`.
///
/// On the oversampled grid this equals [`lag_window_estimate`] up to
/// rounding; on the Fourier grid (`m = n`) it smooths the circular
/// autocovariances `r(k) + r(n - k)` instead.
pub fn estimate_from_periodogram<T: Scalar>(
    pgram: &Periodogram<T>,
    window: Window,
    bn: usize,
    lambda: f64,
) -> Result<T> {
    let kernel = PeriodogramKernel::new(pgram.grid_len(), pgram.n(), window, bn, lambda)?;
    Ok(kernel.apply(pgram.ordinates()))
}

/// `E f_n(lambda) = (1/2pi) sum_{|k|<=B} a(k/B) (1 - |k|/n) r(k) e^{-ik lambda}`
/// from the true autocovariances `acov[0..=B]`.
pub fn expected_estimate(acov: &[f64], n: usize, window: Window, bn: usize, lambda: f64) -> Result<f64> {
    check_bandwidth(bn, n)?;
    if acov.len() <= bn {
        return Err(Error::param(format!("need r(0..={bn}), got {} values", acov.len())));
    }
    let a = window.weights::<f64>(bn);
    let w: Vec<f64> = (0..=bn)
        .map(|k| a[k] * (1.0 - k as f64 / n as f64) * acov[k])
        .collect();
    Ok(cosine_series(&w, lambda))
}

/// `1` when `lambda` is a multiple of `pi` (so `2 lambda` is a multiple of
/// `2 pi`), else `0`.
pub fn eta_double(lambda: f64) -> f64 {
    let r = lambda / PI;
    if (r - r.round()).abs() <= 1e-12 * r.abs().max(1.0) {
        1.0
    } else {
        0.0
    }
}

/// `sigma^2(lambda) = (1 + eta(2 lambda)) f^2 int a^2`.
pub fn asymptotic_variance(f_val: f64, lambda: f64, window: Window) -> f64 {
    (1.0 + eta_double(lambda)) * f_val * f_val * window.sq_integral()
}

/// `f''(lambda) = -(1/2pi) sum_{|k|<=K} r(k) k^2 e^{-ik lambda}` from
/// `acov[0..=K]`.
pub fn spectral_second_derivative(acov: &[f64], lambda: f64) -> f64 {
    let mut acc = CompensatedSum::<f64>::new();
    for (k, &r) in acov.iter().enumerate().skip(1) {
        acc.add(r * (k * k) as f64 * phase(k, lambda).cos());
    }
    -2.0 * acc.total() / TAU
}

/// Leading bias term `c2 f'' / B_n^2`.
pub fn asymptotic_bias(f_dd: f64, bn: usize, window: Window) -> Result<f64> {
    let c2 = window.require_c2()?;
    if bn == 0 {
        return Err(Error::Bandwidth("truncation lag must be at least 1".into()));
    }
    Ok(c2 * f_dd / (bn * bn) as f64)
}

/// `I(theta_j) / f_ref(theta_j)` for `j = 1..=floor((n-1)/2)`.
pub fn normalized_ordinates<T: Scalar>(
    series: &TimeSeries<T>,
    f_ref: impl Fn(f64) -> f64,
) -> Result<Vec<f64>> {
    let n = series.len();
    let m = (n - 1) / 2;
    if m == 0 {
        return Err(Error::Empty("no Fourier frequencies strictly inside (0, pi)"));
    }
    let p = periodogram(series);
    (1..=m)
        .map(|j| {
            let theta = TAU * j as f64 / n as f64;
            let f = f_ref(theta);
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::NonPositiveReference {
                    frequency: theta,
                    value: f,
                });
            }
            Ok(p.ordinates()[j].to_f64_lossy() / f)
        })
        .collect()
}

/// Kolmogorov-Smirnov distance between the normalised ordinates and the
/// standard exponential law.
pub fn normalized_periodogram_ks<T: Scalar>(
    series: &TimeSeries<T>,
    f_ref: impl Fn(f64) -> f64,
) -> Result<f64> {
    let mut v = normalized_ordinates(series, f_ref)?;
    ks_statistic(&mut v, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-x).exp() })
}
