use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lag window profile `a(x)`: even, supported on `[-1, 1]`, `a(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    #[default]
    Parzen,
    #[serde(alias = "tukey_hanning")]
    TukeyHanning,
    Bartlett,
}

impl Window {
    pub const ALL: [Window; 3] = [Window::Parzen, Window::TukeyHanning, Window::Bartlett];

    pub fn name(&self) -> &'static str {
        match self {
            Window::Parzen => "parzen",
            Window::TukeyHanning => "tukey-hanning",
            Window::Bartlett => "bartlett",
        }
    }

    /// `a(x)`; zero outside `[-1, 1]`.
    #[inline]
    pub fn eval<T: Scalar>(&self, x: T) -> T {
        let x = x.abs();
        if x > T::one() {
            return T::zero();
        }
        let one = T::one();
        match self {
            Window::Parzen => {
                if x <= T::of(0.5) {
                    one - T::of(6.0) * x * x + T::of(6.0) * x * x * x
                } else {
                    let u = one - x;
                    T::of(2.0) * u * u * u
                }
            }
            Window::TukeyHanning => T::of(0.5) * (one + (T::PI() * x).cos()),
            Window::Bartlett => one - x,
        }
    }

    /// `lim x^{-2} (1 - a(x))`, or `None` when `a` is not locally quadratic.
    pub fn c2(&self) -> Option<f64> {
        match self {
            Window::Parzen => Some(6.0),
            Window::TukeyHanning => Some(std::f64::consts::PI.powi(2) / 4.0),
            Window::Bartlett => None,
        }
    }

    /// `c2`, or [`Error::NotLocallyQuadratic`].
    pub fn require_c2(&self) -> Result<f64> {
        self.c2().ok_or(Error::NotLocallyQuadratic(self.name()))
    }

    /// `int_{-1}^{1} a(t)^2 dt`.
    pub fn sq_integral(&self) -> f64 {
        match self {
            Window::Parzen => 151.0 / 280.0,
            Window::TukeyHanning => 0.75,
            Window::Bartlett => 2.0 / 3.0,
        }
    }

    /// Whether `1 + 2 sum_{k=1}^{B} a(k/B) cos(k u) >= 0` for every `u` and
    /// every truncation lag, so estimates built from nonnegative ordinates
    /// are nonnegative.
    pub fn nonneg_spectral_window(&self) -> bool {
        match self {
            Window::Parzen | Window::Bartlett => true,
            Window::TukeyHanning => false,
        }
    }

    /// Fails with [`Error::NegativeSpectralWindow`] for windows that can
    /// produce negative estimates.
    pub fn require_nonneg(&self) -> Result<()> {
        if self.nonneg_spectral_window() {
            Ok(())
        } else {
            Err(Error::NegativeSpectralWindow(self.name()))
        }
    }

    /// Weights `a(k/B)` for `k = 0..=B`.
    pub fn weights<T: Scalar>(&self, bn: usize) -> Vec<T> {
        let b = T::of_usize(bn);
        (0..=bn).map(|k| self.eval(T::of_usize(k) / b)).collect()
    }

    /// Spectral window `W(u) = 1 + 2 sum_{k=1}^{B} a(k/B) cos(k u)`.
    pub fn spectral_window(&self, bn: usize, u: f64) -> f64 {
        let w = self.weights::<f64>(bn);
        1.0 + 2.0 * (1..=bn).map(|k| w[k] * (k as f64 * u).cos()).sum::<f64>()
    }
}

/// Look up a window by name.
pub fn window_profile(name: &str) -> Result<Window> {
    name.parse()
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "parzen" => Ok(Window::Parzen),
            "tukey-hanning" | "tukey" | "hanning" => Ok(Window::TukeyHanning),
            "bartlett" => Ok(Window::Bartlett),
            _ => Err(Error::UnknownWindow(s.to_string())),
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
