//! Geometric moment contraction: empirical decay rates and analytic moment
//! conditions.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::contraction::{map_moment, monte_carlo_moment};
use crate::models::{contraction_coefficients, simulate_coupled_with_rng, ContractionReport, Innovation, MarkovForm, ModelSpec};
use crate::rng::stream_rng;
use crate::stats::linear_fit;
use crate::DEFAULT_BURN_IN;

/// Trace values below this are treated as numerically zero.
pub const TRACE_FLOOR: f64 = 1e-30;
pub const MIN_DECAY_REPS: usize = 30;
/// Largest admissible Kronecker power dimension.
pub const KRONECKER_LIMIT: usize = 10_000;

/// Fit of `E|X_k - X'_k|^alpha ~ C rho^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmcFitReport {
    pub alpha: f64,
    pub lags: Vec<usize>,
    pub moments: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub reps: usize,
    pub rho_hat: f64,
    pub c_hat: f64,
    pub r2: f64,
    /// The trace fell below [`TRACE_FLOOR`] inside the lag grid.
    pub floor_hit: bool,
    /// Number of leading lags used by the fit.
    pub fitted_points: usize,
}

/// Estimate the moment trace over `reps` coupled pairs and fit a geometric
/// rate by least squares on `ln(trace)` against the lag. Pair `r` uses stream
/// `r` of `seed`.
pub fn estimate_decay(spec: &ModelSpec, alpha: f64, lags: &[usize], reps: usize, seed: u64) -> Result<GmcFitReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!("moment order must be positive, got {alpha}")));
    }
    if reps < MIN_DECAY_REPS {
        return Err(Error::InsufficientReplications {
            kind: "estimate_decay",
            got: reps,
            min: MIN_DECAY_REPS,
        });
    }
    if lags.is_empty() || lags[0] == 0 || lags.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("lags must be a nonempty strictly increasing list of positive integers"));
    }
    let n = (*lags.last().unwrap()).max(2);
    let traces = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let pair = simulate_coupled_with_rng(spec, n, DEFAULT_BURN_IN, &mut rng)?;
            let trace = pair.abs_moment_trace(alpha);
            Ok(lags.iter().map(|&k| trace[k - 1]).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut moments = vec![0.0; lags.len()];
    let mut sq = vec![0.0; lags.len()];
    for t in &traces {
        for (i, v) in t.iter().enumerate() {
            moments[i] += v;
            sq[i] += v * v;
        }
    }
    let nr = reps as f64;
    let std_errors = moments
        .iter_mut()
        .zip(&sq)
        .map(|(m, s)| {
            *m /= nr;
            ((s / nr - *m * *m).max(0.0) / (nr - 1.0)).sqrt()
        })
        .collect();

    let fitted_points = moments.iter().position(|&m| m < TRACE_FLOOR).unwrap_or(moments.len());
    let floor_hit = fitted_points < moments.len();
    let (rho_hat, c_hat, r2) = match fitted_points {
        0 => (0.0, 0.0, 1.0),
        // one point: pin C = 1 and solve for rho
        1 => (moments[0].powf(1.0 / lags[0] as f64), 1.0, 1.0),
        k => {
            let x: Vec<f64> = lags[..k].iter().map(|&l| l as f64).collect();
            let y: Vec<f64> = moments[..k].iter().map(|m| m.ln()).collect();
            let fit = linear_fit(&x, &y)?;
            (fit.slope.exp(), fit.intercept.exp(), fit.r2)
        }
    };
    Ok(GmcFitReport {
        alpha,
        lags: lags.to_vec(),
        moments,
        std_errors,
        reps,
        rho_hat,
        c_hat,
        r2,
        floor_hit,
        fitted_points,
    })
}

/// Contraction verdict plus the moment orders it implies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionVerdict {
    #[serde(flatten)]
    pub report: ContractionReport,
    /// When satisfied, GMC holds for every order in `(0, implied_max_order]`.
    pub implied_max_order: Option<f64>,
}

/// Closed-form contraction criterion. When it holds at `alpha`, geometric
/// moment contraction holds for every order in `(0, alpha]`.
pub fn check_contraction(spec: &ModelSpec, alpha: f64) -> Result<ContractionVerdict> {
    let report = contraction_coefficients(spec, alpha)?;
    let implied_max_order = report.satisfied.then_some(alpha);
    Ok(ContractionVerdict {
        report,
        implied_max_order,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentMode {
    Analytic,
    MonteCarlo { reps: usize, seed: u64 },
}

/// `E(A^{(x) m})` for the asymmetric GARCH companion matrix together with
/// the two competing contraction verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentConditionReport {
    pub m: usize,
    pub dimension: usize,
    /// Row-major `E(A^{(x) m})`.
    pub matrix_mean: Vec<Vec<f64>>,
    pub spectral_radius: f64,
    /// Largest singular value.
    pub delta: f64,
    pub satisfied_delta: bool,
    pub satisfied_rho: bool,
    /// The singular-value and spectral-radius verdicts differ.
    pub verdicts_disagree: bool,
    pub mode: MomentMode,
    /// Batch-means standard errors (Monte Carlo mode only).
    pub spectral_radius_std_error: Option<f64>,
    pub delta_std_error: Option<f64>,
}

struct GarchParts {
    /// Deterministic part: rows 1.. of the companion matrix.
    a0: DMatrix<f64>,
    /// Coefficient of `Z` (first row only).
    a1: DMatrix<f64>,
    gamma: f64,
    power: f64,
    innovation: Innovation,
}

fn garch_parts(spec: &ModelSpec) -> Result<GarchParts> {
    let ModelSpec::AsymGarch {
        alpha,
        beta,
        power,
        gamma,
        innovation,
        ..
    } = spec
    else {
        return Err(Error::UnsupportedFamily {
            family: spec.family_name(),
            operation: "garch_moment_matrix",
        });
    };
    spec.validate()?;
    let (r, s) = (alpha.len(), beta.len());
    let d = r + s;
    let coef: Vec<f64> = alpha.iter().chain(beta).copied().collect();
    let mut a0 = DMatrix::zeros(d, d);
    let mut a1 = DMatrix::zeros(d, d);
    for (j, c) in coef.iter().enumerate() {
        a1[(0, j)] = *c;
    }
    for i in 1..r {
        a0[(i, i - 1)] = 1.0;
    }
    if s > 0 {
        for (j, c) in coef.iter().enumerate() {
            a0[(r, j)] = *c;
        }
        for i in r + 1..d {
            a0[(i, i - 1)] = 1.0;
        }
    }
    Ok(GarchParts {
        a0,
        a1,
        gamma: *gamma,
        power: *power,
        innovation: *innovation,
    })
}

impl GarchParts {
    fn matrix(&self, z: f64) -> DMatrix<f64> {
        &self.a0 + &self.a1 * z
    }

    fn z(&self, e: f64) -> f64 {
        (e.abs() - self.gamma * e).powf(self.power)
    }
}

fn kron_power(a: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    let mut out = a.clone();
    for _ in 1..m {
        out = out.kronecker(a);
    }
    out
}

fn radius_and_delta(a: &DMatrix<f64>) -> (f64, f64) {
    let radius = a.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let delta = a.singular_values().iter().copied().fold(0.0, f64::max);
    (radius, delta)
}

const MC_BATCHES: usize = 20;

/// Companion matrix `A(Z)`, `Z = (|e| - gamma e)^power`, averaged in its
/// `m`-fold Kronecker power.
///
/// Analytic mode expands `A = A0 + Z A1` so that every term only needs
/// `E Z^k`; it works for any `m` and fails only when a needed moment is
/// infinite.
pub fn garch_moment_matrix(spec: &ModelSpec, m: usize, mode: MomentMode) -> Result<MomentConditionReport> {
    if m < 1 {
        return Err(Error::param("Kronecker power m must be at least 1"));
    }
    let parts = garch_parts(spec)?;
    let d = parts.a0.nrows();
    let dimension = d
        .checked_pow(m as u32)
        .filter(|&v| v <= KRONECKER_LIMIT)
        .ok_or(Error::SizeLimit {
            dimension: d.saturating_pow(m as u32),
            limit: KRONECKER_LIMIT,
        })?;

    let (mean, radius_se, delta_se) = match mode {
        MomentMode::Analytic => {
            // coeffs[l] = sum over products with exactly l factors of A1
            let mut coeffs = vec![parts.a0.clone(), parts.a1.clone()];
            for _ in 1..m {
                let mut next = vec![DMatrix::zeros(0, 0); coeffs.len() + 1];
                for (l, c) in coeffs.iter().enumerate() {
                    let t0 = c.kronecker(&parts.a0);
                    let t1 = c.kronecker(&parts.a1);
                    next[l] = if next[l].is_empty() { t0 } else { &next[l] + t0 };
                    next[l + 1] = if next[l + 1].is_empty() { t1 } else { &next[l + 1] + t1 };
                }
                coeffs = next;
            }
            let mut mean = DMatrix::zeros(dimension, dimension);
            for (l, c) in coeffs.iter().enumerate() {
                let ez = if l == 0 {
                    1.0
                } else {
                    parts.innovation.asymmetric_power_moment(parts.gamma, parts.power * l as f64)
                };
                if !ez.is_finite() {
                    return Err(Error::param(format!(
                        "innovation has no finite moment of order {}",
                        parts.power * l as f64
                    )));
                }
                mean += c * ez;
            }
            (mean, None, None)
        }
        MomentMode::MonteCarlo { reps, seed } => {
            if reps < MC_BATCHES {
                return Err(Error::InsufficientReplications {
                    kind: "garch_moment_matrix",
                    got: reps,
                    min: MC_BATCHES,
                });
            }
            let batch_means: Vec<DMatrix<f64>> = (0..MC_BATCHES)
                .into_par_iter()
                .map(|b| {
                    let size = reps / MC_BATCHES + usize::from(b < reps % MC_BATCHES);
                    let mut rng = stream_rng(seed, b as u64);
                    let mut acc = DMatrix::zeros(dimension, dimension);
                    for _ in 0..size {
                        let z = parts.z(parts.innovation.sample(&mut rng));
                        acc += kron_power(&parts.matrix(z), m);
                    }
                    acc / size as f64
                })
                .collect();
            let mut mean = DMatrix::zeros(dimension, dimension);
            for (b, bm) in batch_means.iter().enumerate() {
                let w = (reps / MC_BATCHES + usize::from(b < reps % MC_BATCHES)) as f64;
                mean += bm * w;
            }
            mean /= reps as f64;
            let stats: Vec<(f64, f64)> = batch_means.iter().map(radius_and_delta).collect();
            let se = |f: fn(&(f64, f64)) -> f64| {
                let v: Vec<f64> = stats.iter().map(f).collect();
                (crate::stats::variance(&v) / MC_BATCHES as f64).sqrt()
            };
            (mean, Some(se(|s| s.0)), Some(se(|s| s.1)))
        }
    };
    let (spectral_radius, delta) = radius_and_delta(&mean);
    let matrix_mean = (0..dimension).map(|i| mean.row(i).iter().copied().collect()).collect();
    Ok(MomentConditionReport {
        m,
        dimension,
        matrix_mean,
        spectral_radius,
        delta,
        satisfied_delta: delta < 1.0,
        satisfied_rho: spectral_radius < 1.0,
        verdicts_disagree: (delta < 1.0) != (spectral_radius < 1.0),
        mode,
        spectral_radius_std_error: radius_se,
        delta_std_error: delta_se,
    })
}

/// Direct hypothesis checks for the signed volatility model:
/// `E|e|^{alpha power} < 1`, `E|c(e)|^alpha < 1` and `g(e)` in `L^alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedVolCondition {
    pub alpha: f64,
    pub innovation_moment: f64,
    pub c_moment: f64,
    pub c_moment_std_error: f64,
    pub g_moment: f64,
    pub satisfied: bool,
    /// GMC order implied when satisfied: `alpha * power`.
    pub implied_order: Option<f64>,
}

pub fn signed_vol_condition(spec: &ModelSpec, alpha: f64) -> Result<SignedVolCondition> {
    let ModelSpec::SignedVol {
        g,
        c,
        power,
        innovation,
    } = spec
    else {
        return Err(Error::UnsupportedFamily {
            family: spec.family_name(),
            operation: "signed_vol_condition",
        });
    };
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!("moment order must be positive, got {alpha}")));
    }
    spec.validate()?;
    let innovation_moment = innovation.abs_moment(alpha * power);
    let (c_moment, c_moment_std_error, _) = map_moment(c, innovation, alpha);
    let (g_moment, _, _) = map_moment(g, innovation, alpha);
    let satisfied = innovation_moment < 1.0 && c_moment < 1.0 && g_moment.is_finite();
    Ok(SignedVolCondition {
        alpha,
        innovation_moment,
        c_moment,
        c_moment_std_error,
        g_moment,
        satisfied,
        implied_order: satisfied.then_some(alpha * power),
    })
}

/// Monte Carlo estimate of `E|A + B e|_alpha` (induced matrix norm,
/// `alpha` in `{1, 2}`) for a random-coefficient or bilinear model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomCoefficientCondition {
    pub alpha: f64,
    pub mean_norm: f64,
    pub std_error: f64,
    pub draws: usize,
    pub satisfied: bool,
}

pub fn random_coefficient_condition(spec: &ModelSpec, alpha: f64) -> Result<RandomCoefficientCondition> {
    let (a, b, innovation) = match spec {
        ModelSpec::RcAr { a, b, innovation, .. } => {
            spec.validate()?;
            let dim = a.len();
            let flat = |m: &Vec<Vec<f64>>| DMatrix::from_fn(dim, dim, |i, j| m[i][j]);
            (flat(a), flat(b), *innovation)
        }
        ModelSpec::Bilinear { innovation, .. } => {
            let f = MarkovForm::from_bilinear(spec)?;
            (f.a, f.b, *innovation)
        }
        _ => {
            return Err(Error::UnsupportedFamily {
                family: spec.family_name(),
                operation: "random_coefficient_condition",
            })
        }
    };
    let norm: fn(&DMatrix<f64>) -> f64 = if alpha == 1.0 {
        |m| m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    } else if alpha == 2.0 {
        |m| m.singular_values().iter().copied().fold(0.0, f64::max)
    } else {
        return Err(Error::param(format!("induced matrix norm supported for alpha in {{1, 2}}, got {alpha}")));
    };
    let (mean_norm, std_error) = monte_carlo_moment(&innovation, 1.0, |e| norm(&(&a + &b * e)));
    Ok(RandomCoefficientCondition {
        alpha,
        mean_norm,
        std_error,
        draws: crate::models::contraction::MONTE_CARLO_DRAWS,
        satisfied: mean_norm < 1.0,
    })
}
