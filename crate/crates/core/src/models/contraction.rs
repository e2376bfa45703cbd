use serde::{Deserialize, Serialize};

use super::innovation::Innovation;
use super::spec::{InnovationMap, ModelSpec};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Draws used when a norm has no closed form.
pub const MONTE_CARLO_DRAWS: usize = 200_000;
const MONTE_CARLO_SEED: u64 = 0x5eed_c0de;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContractionMethod {
    Analytic,
    MonteCarlo { draws: usize },
}

/// Per-lag Lipschitz coefficients `a_j = ||H_j(e)||_alpha^{min(1, alpha)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub alpha: f64,
    pub coefficients: Vec<f64>,
    pub total: f64,
    pub satisfied: bool,
    pub method: ContractionMethod,
    /// Monte Carlo standard error of each coefficient (zero when analytic).
    pub std_errors: Vec<f64>,
}

impl ContractionReport {
    fn new(alpha: f64, coefficients: Vec<f64>, std_errors: Vec<f64>, method: ContractionMethod) -> Self {
        let total = coefficients.iter().sum::<f64>();
        ContractionReport {
            alpha,
            satisfied: total < 1.0,
            total,
            coefficients,
            std_errors,
            method,
        }
    }
}

/// `(mean, std_error)` of `phi(e)^alpha` with `phi >= 0`, estimated from a
/// fixed internal stream.
pub(crate) fn monte_carlo_moment(innovation: &Innovation, alpha: f64, phi: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut rng = stream_rng(MONTE_CARLO_SEED, 0);
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..MONTE_CARLO_DRAWS {
        let v = phi(innovation.sample(&mut rng)).abs().powf(alpha);
        sum += v;
        sq += v * v;
    }
    let n = MONTE_CARLO_DRAWS as f64;
    let mean = sum / n;
    let var = (sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `E (u + v |e|^p)^alpha` for `u, v >= 0` with its standard error and
/// whether it is exact.
fn affine_abs_moment(innovation: &Innovation, u: f64, v: f64, p: f64, alpha: f64) -> (f64, f64, bool) {
    if v == 0.0 {
        (u.powf(alpha), 0.0, true)
    } else if alpha.fract() == 0.0 && alpha <= 64.0 {
        let m = alpha as u32;
        let e = (0..=m)
            .map(|k| binomial(m, k) * u.powi((m - k) as i32) * v.powi(k as i32) * innovation.abs_moment(p * k as f64))
            .sum();
        (e, 0.0, true)
    } else {
        let (e, se) = monte_carlo_moment(innovation, alpha, |x| u + v * x.abs().powf(p));
        (e, se, false)
    }
}

/// `E |map(e)|^alpha` with its standard error and whether it is exact.
pub(crate) fn map_moment(map: &InnovationMap, innovation: &Innovation, alpha: f64) -> (f64, f64, bool) {
    match *map {
        InnovationMap::Constant { value } => (value.abs().powf(alpha), 0.0, true),
        InnovationMap::Affine { intercept, slope: 0.0 } => (intercept.abs().powf(alpha), 0.0, true),
        InnovationMap::AbsPower {
            intercept,
            scale,
            power,
        } if intercept >= 0.0 && scale >= 0.0 => affine_abs_moment(innovation, intercept, scale, power, alpha),
        _ => {
            let (m, se) = monte_carlo_moment(innovation, alpha, |e| map.eval(e));
            (m, se, false)
        }
    }
}

/// `E H^alpha -> (E H^alpha)^{alpha'/alpha}` with a delta-method error.
fn to_coefficient((moment, se, exact): (f64, f64, bool), alpha: f64) -> (f64, f64, bool) {
    let r = alpha.min(1.0) / alpha;
    let a = moment.powf(r);
    let a_se = if moment > 0.0 { a * r * se / moment } else { 0.0 };
    (a, a_se, exact)
}

/// Lipschitz coefficients of the one-step map and the verdict of the
/// contraction criterion `sum a_j < 1`.
pub fn contraction_coefficients(spec: &ModelSpec, alpha: f64) -> Result<ContractionReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!("moment order must be positive, got {alpha}")));
    }
    spec.validate()?;
    let ap = alpha.min(1.0);
    let analytic = |coefs: Vec<f64>| {
        let n = coefs.len();
        ContractionReport::new(alpha, coefs, vec![0.0; n], ContractionMethod::Analytic)
    };
    let collect = |parts: Vec<(f64, f64, bool)>| {
        let exact = parts.iter().all(|p| p.2);
        let method = if exact {
            ContractionMethod::Analytic
        } else {
            ContractionMethod::MonteCarlo {
                draws: MONTE_CARLO_DRAWS,
            }
        };
        ContractionReport::new(
            alpha,
            parts.iter().map(|p| p.0).collect(),
            parts.iter().map(|p| p.1).collect(),
            method,
        )
    };
    match spec {
        ModelSpec::Iid { .. } => Ok(analytic(Vec::new())),
        ModelSpec::Ar { coeffs, .. } => Ok(analytic(coeffs.iter().map(|c| c.abs().powf(ap)).collect())),
        ModelSpec::Expar { alpha1, beta1, .. } => Ok(analytic(vec![(alpha1.abs() + beta1.abs()).powf(ap)])),
        ModelSpec::ArArch { theta, innovation } => Ok(collect(vec![
            to_coefficient(affine_abs_moment(innovation, theta[0].abs(), theta[3].abs(), 1.0, alpha), alpha),
            to_coefficient(affine_abs_moment(innovation, theta[1].abs(), theta[4].abs(), 1.0, alpha), alpha),
        ])),
        ModelSpec::SignedVol { c, innovation, .. } => Ok(collect(vec![to_coefficient(map_moment(c, innovation, alpha), alpha)])),
        _ => Err(Error::UnsupportedFamily {
            family: spec.family_name(),
            operation: "contraction_coefficients",
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn g(v: f64) -> Innovation {
        Innovation::Gaussian { variance: v }
    }

    #[test]
    fn expar_coefficient() {
        for alpha in [1.0, 2.0, 4.0] {
            let r = contraction_coefficients(&ModelSpec::expar(0.5, 0.3, 1.0, g(1.0)), alpha).unwrap();
            assert_relative_eq!(r.coefficients[0], 0.8, max_relative = 1e-15);
            assert!(r.satisfied);
        }
        let half = contraction_coefficients(&ModelSpec::expar(0.5, 0.3, 1.0, g(1.0)), 0.5).unwrap();
        assert_relative_eq!(half.coefficients[0], 0.8f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn ar_arch_first_moment() {
        let spec = ModelSpec::ArArch {
            theta: [0.3, 0.2, 1.0, 0.3, 0.2],
            innovation: g(1.0),
        };
        let r = contraction_coefficients(&spec, 1.0).unwrap();
        let m1 = (2.0 / PI).sqrt();
        assert_relative_eq!(r.coefficients[0], 0.3 + 0.3 * m1, max_relative = 1e-12);
        assert_relative_eq!(r.coefficients[1], 0.2 + 0.2 * m1, max_relative = 1e-12);
        assert_eq!(r.satisfied, r.total < 1.0);
        assert_eq!(r.method, ContractionMethod::Analytic);
    }

    #[test]
    fn ar_arch_second_moment() {
        let spec = ModelSpec::ArArch {
            theta: [0.3, 0.0, 1.0, 0.4, 0.0],
            innovation: g(1.0),
        };
        let r = contraction_coefficients(&spec, 2.0).unwrap();
        // sqrt(E (0.3 + 0.4|e|)^2) = sqrt(0.09 + 0.24 E|e| + 0.16)
        let expected = (0.09 + 0.24 * (2.0 / PI).sqrt() + 0.16f64).sqrt();
        assert_relative_eq!(r.coefficients[0], expected, max_relative = 1e-12);
    }

    #[test]
    fn fractional_order_uses_monte_carlo() {
        let spec = ModelSpec::ArArch {
            theta: [0.3, 0.0, 1.0, 0.4, 0.0],
            innovation: Innovation::Rademacher,
        };
        let r = contraction_coefficients(&spec, 1.5).unwrap();
        assert!(matches!(r.method, ContractionMethod::MonteCarlo { .. }));
        // |e| = 1 almost surely
        assert_relative_eq!(r.coefficients[0], 0.7, max_relative = 1e-9);
    }

    #[test]
    fn trivial_cases() {
        let r = contraction_coefficients(&ModelSpec::ar(vec![0.0], g(1.0)), 2.0).unwrap();
        assert_eq!(r.coefficients, vec![0.0]);
        assert!(r.satisfied);
        assert!(contraction_coefficients(&ModelSpec::iid(g(1.0)), 1.0).unwrap().satisfied);
        assert!(contraction_coefficients(&ModelSpec::iid(g(1.0)), 0.0).is_err());
        assert!(contraction_coefficients(&ModelSpec::iid(g(1.0)), -1.0).is_err());
    }

    #[test]
    fn expar_is_scale_free_and_ar_arch_is_not() {
        let e1 = contraction_coefficients(&ModelSpec::expar(0.6, 0.3, 1.0, g(1.0)), 2.0).unwrap();
        let e4 = contraction_coefficients(&ModelSpec::expar(0.6, 0.3, 1.0, g(4.0)), 2.0).unwrap();
        assert_eq!(e1, e4);
        let arch = |v| ModelSpec::ArArch {
            theta: [0.3, 0.2, 1.0, 0.3, 0.2],
            innovation: g(v),
        };
        let a1 = contraction_coefficients(&arch(1.0), 1.0).unwrap();
        let a4 = contraction_coefficients(&arch(4.0), 1.0).unwrap();
        let m1 = (2.0 / PI).sqrt();
        assert_relative_eq!(a4.coefficients[0], 0.3 + 0.3 * 2.0 * m1, max_relative = 1e-12);
        assert!(a1.satisfied && !a4.satisfied);
    }

    #[test]
    fn signed_vol_uses_c_map() {
        let spec = ModelSpec::SignedVol {
            g: InnovationMap::Constant { value: 1.0 },
            c: InnovationMap::AbsPower {
                intercept: 0.1,
                scale: 0.5,
                power: 2.0,
            },
            power: 2.0,
            innovation: g(1.0),
        };
        let r = contraction_coefficients(&spec, 1.0).unwrap();
        assert_relative_eq!(r.coefficients[0], 0.6, max_relative = 1e-12);
        let affine = ModelSpec::SignedVol {
            g: InnovationMap::Constant { value: 1.0 },
            c: InnovationMap::Affine {
                intercept: 0.0,
                slope: 0.5,
            },
            power: 2.0,
            innovation: g(1.0),
        };
        let r = contraction_coefficients(&affine, 1.0).unwrap();
        let exact = 0.5 * (2.0 / PI).sqrt();
        assert!((r.coefficients[0] - exact).abs() < 4.0 * r.std_errors[0]);
    }

    #[test]
    fn unsupported() {
        let spec = ModelSpec::garch(0.1, vec![0.1], vec![0.8], g(1.0));
        assert!(matches!(
            contraction_coefficients(&spec, 1.0),
            Err(Error::UnsupportedFamily { .. })
        ));
    }
}
