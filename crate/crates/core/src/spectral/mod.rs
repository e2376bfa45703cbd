//! Fourier transforms, periodograms and lag-window spectral density
//! estimates.

mod estimate;
mod fourier;
mod periodogram;
mod window;

pub use estimate::{
    asymptotic_bias, asymptotic_variance, default_grid, estimate_from_periodogram, eta_double,
    expected_estimate, frequency_grid, lag_window_estimate, normalized_ordinates,
    normalized_periodogram_ks, spectral_second_derivative, PeriodogramKernel, SpectralEstimate,
    DEFAULT_GRID_POINTS,
};
pub use fourier::{fourier_grid, fourier_transform};
pub use periodogram::{
    oversampled_periodogram, periodogram, periodogram_at, periodogram_direct, sample_acov,
    sample_acov_seq, Periodogram,
};
pub use window::{window_profile, Window};
