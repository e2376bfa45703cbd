use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::OracleSettings;
use crate::error::{Error, Result};
use crate::models::{simulate_with_rng, theoretical_spectrum, ModelSpec};
use crate::rng::stream_rng;
use crate::spectral::{sample_acov_seq, Window};
use crate::stats;
use crate::DEFAULT_BURN_IN;

/// Monte Carlo reference spectrum: the average of Parzen lag-window
/// estimates from `reps` long independent paths, with `B = ceil(n^(1/3))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpectrum {
    pub n_oracle: usize,
    pub reps: usize,
    pub bn: usize,
    /// `r(k) a(k/B)` per replication.
    weighted_acov: Vec<Vec<f64>>,
}

fn cosine_series(w: &[f64], lambda: f64) -> f64 {
    let tail: f64 = w
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| v * (k as f64 * lambda % TAU).cos())
        .sum();
    (w[0] + 2.0 * tail) / TAU
}

impl OracleSpectrum {
    fn per_rep(&self, lambda: f64) -> Vec<f64> {
        self.weighted_acov.iter().map(|w| cosine_series(w, lambda)).collect()
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        stats::mean(&self.per_rep(lambda))
    }

    /// Standard error of [`OracleSpectrum::eval`] across replications.
    pub fn std_error(&self, lambda: f64) -> f64 {
        if self.reps < 2 {
            return f64::NAN;
        }
        stats::std_error(&self.per_rep(lambda))
    }
}

/// Build an [`OracleSpectrum`]; fails with [`Error::Budget`] when
/// `n_oracle * reps` exceeds the budget.
pub fn oracle_spectrum(spec: &ModelSpec, settings: &OracleSettings, seed: u64) -> Result<OracleSpectrum> {
    spec.validate()?;
    let OracleSettings {
        n_oracle,
        reps,
        budget,
    } = *settings;
    if n_oracle < 8 || reps < 1 {
        return Err(Error::param("oracle needs n_oracle >= 8 and reps >= 1"));
    }
    let requested = n_oracle.saturating_mul(reps);
    if requested > budget {
        return Err(Error::Budget {
            requested,
            limit: budget,
        });
    }
    let bn = ((n_oracle as f64).cbrt().ceil() as usize).max(1);
    let a = Window::Parzen.weights::<f64>(bn);
    let weighted_acov = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let x = simulate_with_rng(spec, n_oracle, DEFAULT_BURN_IN, &mut rng)?;
            let acov = sample_acov_seq(&x, bn)?;
            Ok(acov.iter().zip(&a).map(|(r, w)| r * w).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(OracleSpectrum {
        n_oracle,
        reps,
        bn,
        weighted_acov,
    })
}

/// Spectral density used as ground truth by the experiments.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSpectrum {
    Exact(ModelSpec),
    Oracle(OracleSpectrum),
}

impl ReferenceSpectrum {
    /// Closed form when available, otherwise an oracle estimate.
    pub fn for_spec(spec: &ModelSpec, settings: &OracleSettings, seed: u64) -> Result<Self> {
        match theoretical_spectrum(spec, 0.0) {
            Ok(_) => Ok(ReferenceSpectrum::Exact(spec.clone())),
            Err(Error::UnsupportedFamily { .. }) => {
                Ok(ReferenceSpectrum::Oracle(oracle_spectrum(spec, settings, seed)?))
            }
            Err(e) => Err(e),
        }
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        match self {
            ReferenceSpectrum::Exact(spec) => theoretical_spectrum(spec, lambda).unwrap_or(f64::NAN),
            ReferenceSpectrum::Oracle(o) => o.eval(lambda),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ReferenceSpectrum::Exact(_))
    }
}
