use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::fourier::{fourier_grid, fourier_transform, phase};
use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Scalar};
use crate::series::TimeSeries;

/// Periodogram ordinates `I_j = |S_n(omega_j)|^2 / (2 pi n)` on the grid
/// `omega_j = 2 pi j / m`, `j` in `{-floor((m-1)/2), ..., floor(m/2)}`.
///
/// Only `j = 0..=m/2` is stored; `I_{-j} = I_j`. The Fourier grid is
/// `m = n`. The oversampled grid `m = 2n` makes the inversion to the sample
/// autocovariances exact (on `m = n` it is circular:
/// `r(k) + r(n - k)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Periodogram<T = f64> {
    n: usize,
    grid_len: usize,
    ordinates: Vec<T>,
}

impl<T: Scalar> Periodogram<T> {
    /// Wrap precomputed ordinates for `j = 0..=grid_len/2`.
    pub fn from_ordinates(n: usize, grid_len: usize, ordinates: Vec<T>) -> Result<Self> {
        if n < 2 {
            return Err(Error::SeriesTooShort(n));
        }
        if grid_len < n || ordinates.len() != grid_len / 2 + 1 {
            return Err(Error::param(format!(
                "expected {} ordinates on a grid of {grid_len} points",
                grid_len / 2 + 1
            )));
        }
        if let Some(i) = ordinates.iter().position(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            n,
            grid_len,
            ordinates,
        })
    }

    /// Sample size the ordinates were normalised by.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points `m` on `(-pi, pi]`.
    pub fn grid_len(&self) -> usize {
        self.grid_len
    }

    pub fn is_fourier_grid(&self) -> bool {
        self.grid_len == self.n
    }

    /// `I_j` for `j = 0..=m/2`.
    pub fn ordinates(&self) -> &[T] {
        &self.ordinates
    }

    /// `I_j` for any `j` in the index set.
    pub fn ordinate(&self, j: i64) -> T {
        self.ordinates[j.unsigned_abs() as usize]
    }

    pub fn frequency(&self, j: i64) -> f64 {
        TAU * j as f64 / self.grid_len as f64
    }

    /// The index set `{-floor((m-1)/2), ..., floor(m/2)}`.
    pub fn index_set(&self) -> std::ops::RangeInclusive<i64> {
        let m = self.grid_len as i64;
        -((m - 1) / 2)..=m / 2
    }

    /// Multiplicity of stored ordinate `j` in the index set.
    pub(crate) fn multiplicity(grid_len: usize, j: usize) -> usize {
        if j == 0 || 2 * j == grid_len {
            1
        } else {
            2
        }
    }

    /// `(2 pi / m) sum_{j} I_j e^{i k omega_j}`.
    pub fn inverse_acov(&self, k: i64) -> T {
        let m = self.grid_len;
        let mut acc = CompensatedSum::new();
        for (j, &v) in self.ordinates.iter().enumerate() {
            let c = phase(j, TAU * k.unsigned_abs() as f64 / m as f64).cos();
            acc.add(v * T::of(c * Self::multiplicity(m, j) as f64));
        }
        acc.total() * T::of(TAU / m as f64)
    }
}

fn from_transform<T: Scalar>(n: usize, m: usize, s: Vec<num_complex::Complex<T>>) -> Periodogram<T> {
    let norm = T::of(TAU * n as f64);
    Periodogram {
        n,
        grid_len: m,
        ordinates: s.into_iter().map(|z| z.norm_sqr() / norm).collect(),
    }
}

/// Periodogram at the Fourier frequencies `2 pi j / n`.
pub fn periodogram<T: Scalar>(series: &TimeSeries<T>) -> Periodogram<T> {
    let n = series.len();
    from_transform(n, n, fourier_grid(series.values(), n))
}

/// Periodogram on the `2n`-point grid, where the autocovariance inversion is
/// exact.
pub fn oversampled_periodogram<T: Scalar>(series: &TimeSeries<T>) -> Periodogram<T> {
    let n = series.len();
    from_transform(n, 2 * n, fourier_grid(series.values(), 2 * n))
}

/// Fourier-grid periodogram by direct summation at every frequency.
pub fn periodogram_direct<T: Scalar>(series: &TimeSeries<T>) -> Periodogram<T> {
    let n = series.len();
    let s = (0..=n / 2)
        .map(|j| fourier_transform(series.values(), TAU * j as f64 / n as f64))
        .collect();
    from_transform(n, n, s)
}

/// `I_n(theta) = |S_n(theta)|^2 / (2 pi n)` at an arbitrary frequency.
pub fn periodogram_at<T: Scalar>(series: &TimeSeries<T>, theta: f64) -> T {
    fourier_transform(series.values(), theta).norm_sqr() / T::of(TAU * series.len() as f64)
}

/// `r(k) = n^{-1} sum_{j=1}^{n-|k|} X_j X_{j+|k|}`.
pub fn sample_acov<T: Scalar>(series: &TimeSeries<T>, lag: i64) -> Result<T> {
    let n = series.len();
    let k = lag.unsigned_abs() as usize;
    if k >= n {
        return Err(Error::LagOutOfRange { lag: k, n });
    }
    Ok(acov_unchecked(series.values(), k))
}

/// `r(0..=max_lag)`.
pub fn sample_acov_seq<T: Scalar>(series: &TimeSeries<T>, max_lag: usize) -> Result<Vec<T>> {
    let n = series.len();
    if max_lag >= n {
        return Err(Error::LagOutOfRange { lag: max_lag, n });
    }
    Ok((0..=max_lag).map(|k| acov_unchecked(series.values(), k)).collect())
}

pub(crate) fn acov_unchecked<T: Scalar>(x: &[T], k: usize) -> T {
    let n = x.len();
    let mut acc = CompensatedSum::new();
    for j in 0..n - k {
        acc.add(x[j] * x[j + k]);
    }
    acc.total() / T::of_usize(n)
}
