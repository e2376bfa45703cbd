use std::f64::consts::TAU;

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::{CompensatedSum, Scalar};

/// Reduce `k * theta` modulo `2 pi` in `f64` before taking cosines, so long
/// series keep full phase accuracy even in `f32` mode.
#[inline]
pub(crate) fn phase(k: usize, theta: f64) -> f64 {
    (k as f64 * theta) % TAU
}

/// `S_n(theta) = sum_{k=1}^{n} X_k e^{i k theta}` by direct compensated
/// summation.
pub fn fourier_transform<T: Scalar>(x: &[T], theta: f64) -> Complex<T> {
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for (i, &v) in x.iter().enumerate() {
        let (s, c) = phase(i + 1, theta).sin_cos();
        re.add(v * T::of(c));
        im.add(v * T::of(s));
    }
    Complex::new(re.total(), im.total())
}

/// `S_n(2 pi j / m)` for `j = 0..=m/2`, zero-padding the series to length
/// `m >= n`.
pub fn fourier_grid<T: Scalar>(x: &[T], m: usize) -> Vec<Complex<T>> {
    assert!(m >= x.len(), "grid must be at least as long as the series");
    let mut buf: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
    buf.resize(m, Complex::new(T::zero(), T::zero()));
    // the inverse transform carries the e^{+i} sign convention
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    (0..=m / 2)
        .map(|j| {
            let (s, c) = phase(j, TAU / m as f64).sin_cos();
            buf[j] * Complex::new(T::of(c), T::of(s))
        })
        .collect()
}
