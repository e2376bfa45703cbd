//! Spectral analysis of stationary causal nonlinear time series.
//!
//! The crate is organised around five areas:
//!
//! * [`models`]: nonlinear autoregressive recursions (EXPAR, AR-ARCH,
//!   bilinear, asymmetric power GARCH, signed volatility, random coefficient
//!   AR) plus linear ARMA filtering, coupled trajectories and closed-form
//!   second-order quantities.
//! * [`spectral`]: Fourier transforms, periodograms, lag-window spectral
//!   density estimates and their asymptotic variance/bias constants.
//! * [`bootstrap`]: the residual-based frequency-domain bootstrap and the
//!   Mallows `d2` distance.
//! * [`gmc`]: empirical geometric-moment-contraction rates and analytic
//!   moment conditions.
//! * [`experiments`]: seeded Monte Carlo checks of the limit theorems.
//!
//! The spectral and bootstrap code is generic over the [`Scalar`] type
//! (`f32` or `f64`); simulation and the experiment harness run in `f64`.
//! Concrete `f64` aliases are exported at the crate root.

pub mod bootstrap;
pub mod error;
pub mod experiments;
pub mod gmc;
pub mod models;
pub mod rng;
pub mod scalar;
pub mod series;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use series::TimeSeries;

/// Default number of discarded warm-up steps for every simulation.
pub const DEFAULT_BURN_IN: usize = 1000;

pub type TimeSeries64 = series::TimeSeries<f64>;
pub type TimeSeries32 = series::TimeSeries<f32>;
pub type Periodogram64 = spectral::Periodogram<f64>;
pub type Periodogram32 = spectral::Periodogram<f32>;
pub type SpectralEstimate64 = spectral::SpectralEstimate<f64>;
pub type SpectralEstimate32 = spectral::SpectralEstimate<f32>;
pub type ResidualSet64 = bootstrap::ResidualSet<f64>;
pub type BootstrapDistribution64 = bootstrap::BootstrapDistribution<f64>;
pub type BootstrapDistribution32 = bootstrap::BootstrapDistribution<f32>;
