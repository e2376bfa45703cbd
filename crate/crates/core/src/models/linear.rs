use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::innovation::Innovation;
use super::spec::{ArmaDriver, InnovationMap, ModelSpec};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Spectral radius of the companion matrix of `x_t = sum coeffs[k] x_{t-k-1}`.
pub fn companion_spectral_radius(coeffs: &[f64]) -> f64 {
    let p = coeffs.len();
    if p == 0 {
        return 0.0;
    }
    if p == 1 {
        return coeffs[0].abs();
    }
    let mut m = DMatrix::<f64>::zeros(p, p);
    for (j, c) in coeffs.iter().enumerate() {
        m[(0, j)] = *c;
    }
    for i in 1..p {
        m[(i, i - 1)] = 1.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Fails with [`Error::Unstable`] unless the AR recursion is strictly stable.
pub fn check_stable(coeffs: &[f64]) -> Result<()> {
    let spectral_radius = companion_spectral_radius(coeffs);
    if !(spectral_radius < 1.0) {
        return Err(Error::Unstable { spectral_radius });
    }
    Ok(())
}

/// Apply `X_t = sum ar_k X_{t-k} + eta_t - sum ma_k eta_{t-k}` to `input`
/// from the zero state and drop the first `burn_in` outputs.
pub fn arma_filter(
    input: &TimeSeries<f64>,
    ar: &[f64],
    ma: &[f64],
    burn_in: usize,
) -> Result<TimeSeries<f64>> {
    check_stable(ar)?;
    let eta = input.values();
    let mut x = Vec::with_capacity(eta.len());
    for t in 0..eta.len() {
        let mut v = eta[t];
        for (k, th) in ar.iter().enumerate().take(t) {
            v += th * x[t - k - 1];
        }
        for (k, ph) in ma.iter().enumerate().take(t) {
            v -= ph * eta[t - k - 1];
        }
        x.push(v);
    }
    if x.len() < burn_in + 2 {
        return Err(Error::SeriesTooShort(x.len().saturating_sub(burn_in)));
    }
    let mut out = TimeSeries::new(x.split_off(burn_in))?;
    out.burn_in = input.burn_in + burn_in;
    out.seed = input.seed;
    Ok(out)
}

/// Causal weights `psi_j` with `X_t = sum psi_j eta_{t-j}`, truncated once the
/// tail is negligible.
pub fn psi_weights(ar: &[f64], ma: &[f64]) -> Vec<f64> {
    const MAX_TERMS: usize = 1 << 20;
    let mut psi = vec![1.0];
    let mut energy = 1.0;
    let mut quiet = 0usize;
    let lead = ar.len().max(ma.len());
    for j in 1..MAX_TERMS {
        let mut v = -ma.get(j - 1).copied().unwrap_or(0.0);
        for (k, th) in ar.iter().enumerate() {
            if k < j {
                v += th * psi[j - k - 1];
            }
        }
        psi.push(v);
        energy += v * v;
        if j > lead && v * v <= 1e-34 * energy {
            quiet += 1;
            if quiet > ar.len() {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    psi
}

fn driver_variance(driver: &ArmaDriver) -> Result<f64> {
    match driver {
        ArmaDriver::Innovation(i) => Ok(i.variance()),
        ArmaDriver::Model(m) => match **m {
            ModelSpec::Iid { .. } | ModelSpec::AsymGarch { .. } | ModelSpec::SignedVol { .. } => {
                Ok(theoretical_acov(m, 0)?[0])
            }
            _ => Err(Error::UnsupportedFamily {
                family: m.family_name(),
                operation: "white-noise ARMA input",
            }),
        },
    }
}

fn garch_variance(
    alpha0: f64,
    alpha: &[f64],
    beta: &[f64],
    gamma: f64,
    innovation: &Innovation,
) -> Result<f64> {
    let v = innovation.variance();
    let denom = 1.0 - (1.0 + gamma * gamma) * v * alpha.iter().sum::<f64>() - beta.iter().sum::<f64>();
    if denom <= 0.0 {
        return Err(Error::param("asym_garch has no finite second moment"));
    }
    Ok(v * alpha0 / denom)
}

fn signed_vol_variance(g: &InnovationMap, c: &InnovationMap, innovation: &Innovation) -> Result<f64> {
    if !(g.is_nonnegative() && c.is_nonnegative()) {
        return Err(Error::UnsupportedFamily {
            family: "signed_vol",
            operation: "theoretical_acov with sign-changing g or c",
        });
    }
    let ec = c.mean(innovation);
    if ec >= 1.0 {
        return Err(Error::param("signed_vol has no finite second moment (E c >= 1)"));
    }
    Ok(innovation.variance() * g.mean(innovation) / (1.0 - ec))
}

fn unsupported(spec: &ModelSpec) -> Error {
    Error::UnsupportedFamily {
        family: spec.family_name(),
        operation: "theoretical_acov",
    }
}

/// Exact autocovariances `r(0..=max_lag)` where a closed form exists.
///
/// Supported: iid, ar, arma driven by white noise (an innovation, or an iid,
/// power-2 asym_garch or nonnegative power-2 signed_vol model), power-2
/// asym_garch, power-2 signed_vol with nonnegative maps, and ar_arch with
/// `theta2 = theta5 = 0`.
pub fn theoretical_acov(spec: &ModelSpec, max_lag: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let white = |r0: f64| {
        let mut r = vec![0.0; max_lag + 1];
        r[0] = r0;
        r
    };
    match spec {
        ModelSpec::Iid { innovation } => Ok(white(innovation.variance())),
        ModelSpec::Ar { coeffs, innovation } => {
            Ok(linear_acov(coeffs, &[], innovation.variance(), max_lag))
        }
        ModelSpec::Arma { ar, ma, driver } => Ok(linear_acov(ar, ma, driver_variance(driver)?, max_lag)),
        ModelSpec::AsymGarch {
            alpha0,
            alpha,
            beta,
            power,
            gamma,
            innovation,
        } if *power == 2.0 => Ok(white(garch_variance(*alpha0, alpha, beta, *gamma, innovation)?)),
        ModelSpec::SignedVol {
            g,
            c,
            power,
            innovation,
        } if *power == 2.0 => Ok(white(signed_vol_variance(g, c, innovation)?)),
        ModelSpec::ArArch { theta, innovation } if theta[1] == 0.0 && theta[4] == 0.0 => {
            let v = innovation.variance();
            let denom = 1.0 - theta[0] * theta[0] - v * theta[3] * theta[3];
            if denom <= 0.0 {
                return Err(Error::param("ar_arch has no finite second moment"));
            }
            let r0 = v * theta[2] * theta[2] / denom;
            Ok((0..=max_lag).map(|k| r0 * theta[0].powi(k as i32)).collect())
        }
        _ => Err(unsupported(spec)),
    }
}

fn linear_acov(ar: &[f64], ma: &[f64], variance: f64, max_lag: usize) -> Vec<f64> {
    let psi = psi_weights(ar, ma);
    (0..=max_lag)
        .map(|k| {
            // past the truncation point the weights are numerically zero
            if k >= psi.len() {
                return 0.0;
            }
            variance * psi[..psi.len() - k].iter().zip(&psi[k..]).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect()
}

fn transfer_sq(coeffs: &[f64], lambda: f64) -> f64 {
    let mut z = Complex64::new(1.0, 0.0);
    for (k, c) in coeffs.iter().enumerate() {
        z -= c * Complex64::from_polar(1.0, (k + 1) as f64 * lambda);
    }
    z.norm_sqr()
}

/// Spectral density `f(lambda) = (1/2pi) sum_k r(k) e^{ik lambda}` where a
/// closed form exists (same families as [`theoretical_acov`]).
pub fn theoretical_spectrum(spec: &ModelSpec, lambda: f64) -> Result<f64> {
    spec.validate()?;
    let arma = |ar: &[f64], ma: &[f64], v: f64| v * transfer_sq(ma, lambda) / (2.0 * PI * transfer_sq(ar, lambda));
    match spec {
        ModelSpec::Ar { coeffs, innovation } => Ok(arma(coeffs, &[], innovation.variance())),
        ModelSpec::Arma { ar, ma, driver } => Ok(arma(ar, ma, driver_variance(driver)?)),
        ModelSpec::ArArch { theta, .. } if theta[1] == 0.0 && theta[4] == 0.0 => {
            let r0 = theoretical_acov(spec, 0)?[0];
            let phi = theta[0];
            Ok(arma(&[phi], &[], r0 * (1.0 - phi * phi)))
        }
        _ => Ok(theoretical_acov(spec, 0)?[0] / (2.0 * PI)),
    }
}
