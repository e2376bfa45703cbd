use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{simulate_with_rng, ModelSpec};
use crate::rng::{derive_seed, stream_rng};
use crate::spectral::Window;
use crate::stats::{self, LinearFit};
use crate::DEFAULT_BURN_IN;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockScalingPoint {
    /// Number of summed terms `s`.
    pub s: usize,
    pub bn: usize,
    pub variance: f64,
    /// Gaussian approximation `variance * sqrt(2 / (reps - 1))`.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockScalingReport {
    pub lambda: f64,
    pub reps: usize,
    pub points: Vec<BlockScalingPoint>,
    /// Least squares fit of `ln variance` on `ln(s * bn)`.
    pub fit: LinearFit,
}

/// Variance of `sum_{u=1}^{s} (Y_u - E Y_u)` with
/// `Y_u = (1/2pi) sum_{|k|<=B} X_u X_{u+k} a(k/B) cos(k lambda)`, over a set
/// of `(s, B)` pairs. For short-memory input the variance grows like `s B`,
/// so the fitted log-log slope should be close to one.
pub fn block_sum_scaling(
    spec: &ModelSpec,
    window: Window,
    lambda: f64,
    sizes: &[(usize, usize)],
    reps: usize,
    seed: u64,
) -> Result<BlockScalingReport> {
    if sizes.len() < 2 {
        return Err(Error::param("need at least two (s, B) pairs for a slope"));
    }
    if reps < 2 {
        return Err(Error::InsufficientReplications {
            kind: "block scaling",
            got: reps,
            min: 2,
        });
    }
    if sizes.iter().any(|&(s, b)| s < 1 || b < 1) {
        return Err(Error::param("block sizes and lags must be positive"));
    }
    let mut points = Vec::with_capacity(sizes.len());
    for (i, &(s, bn)) in sizes.iter().enumerate() {
        let a = window.weights::<f64>(bn);
        let coef: Vec<f64> = (0..=bn)
            .map(|k| a[k] * (k as f64 * lambda % TAU).cos() / TAU)
            .collect();
        let stage = derive_seed(seed, i as u64);
        let totals = (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream_rng(stage, r as u64);
                let x = simulate_with_rng(spec, s + 2 * bn, DEFAULT_BURN_IN, &mut rng)?;
                let x = x.values();
                let mut total = 0.0;
                for u in bn..bn + s {
                    // k and -k carry the same coefficient
                    let mut y = coef[0] * x[u] * x[u];
                    for k in 1..=bn {
                        y += coef[k] * x[u] * (x[u + k] + x[u - k]);
                    }
                    total += y;
                }
                Ok(total)
            })
            .collect::<Result<Vec<f64>>>()?;
        let variance = stats::variance(&totals);
        points.push(BlockScalingPoint {
            s,
            bn,
            variance,
            std_error: variance * (2.0 / (reps - 1) as f64).sqrt(),
        });
    }
    let x: Vec<f64> = points.iter().map(|p| ((p.s * p.bn) as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.variance.ln()).collect();
    let fit = stats::linear_fit(&x, &y)?;
    Ok(BlockScalingReport {
        lambda,
        reps,
        points,
        fit,
    })
}
