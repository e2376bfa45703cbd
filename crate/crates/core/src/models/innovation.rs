use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Law of the i.i.d. innovations. Every kind has mean zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Innovation {
    Gaussian { variance: f64 },
    /// +1 or -1 with equal probability.
    Rademacher,
    /// Student t with `df` degrees of freedom, rescaled to unit variance.
    StudentT { df: f64 },
    /// Uniform on `[-sqrt(3), sqrt(3)]`.
    Uniform,
}

impl Default for Innovation {
    fn default() -> Self {
        Innovation::Gaussian { variance: 1.0 }
    }
}

const SQRT_3: f64 = 1.732_050_807_568_877_2;

impl Innovation {
    pub fn standard_gaussian() -> Self {
        Self::default()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Innovation::Gaussian { .. } => "gaussian",
            Innovation::Rademacher => "rademacher",
            Innovation::StudentT { .. } => "student_t",
            Innovation::Uniform => "uniform",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Innovation::Gaussian { variance } if !(variance > 0.0 && variance.is_finite()) => Err(
                Error::param(format!("gaussian variance must be positive, got {variance}")),
            ),
            Innovation::StudentT { df } if !(df > 2.0 && df.is_finite()) => Err(Error::param(
                format!("student_t needs df > 2 for a finite variance, got {df}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Innovation::Gaussian { variance } => variance,
            _ => 1.0,
        }
    }

    /// Whether `E|e|^p` is finite.
    pub fn has_moment(&self, p: f64) -> bool {
        match *self {
            Innovation::StudentT { df } => p < df,
            _ => true,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Innovation::Gaussian { variance } => {
                let z: f64 = StandardNormal.sample(rng);
                variance.sqrt() * z
            }
            Innovation::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Innovation::StudentT { df } => {
                let t = StudentT::new(df).expect("validated df").sample(rng);
                t * ((df - 2.0) / df).sqrt()
            }
            Innovation::Uniform => SQRT_3 * (2.0 * rng.random::<f64>() - 1.0),
        }
    }

    /// Closed form `E|e|^p` for `p >= 0`; `+inf` when the moment does not exist.
    pub fn abs_moment(&self, p: f64) -> f64 {
        if p == 0.0 {
            return 1.0;
        }
        if p == 2.0 {
            return self.variance();
        }
        match *self {
            Innovation::Gaussian { variance } => {
                // E|Z|^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi)
                let ln = 0.5 * p * 2f64.ln() + ln_gamma(0.5 * (p + 1.0))
                    - 0.5 * std::f64::consts::PI.ln();
                variance.powf(0.5 * p) * ln.exp()
            }
            Innovation::Rademacher => 1.0,
            Innovation::Uniform => SQRT_3.powf(p) / (p + 1.0),
            Innovation::StudentT { df } => {
                if p >= df {
                    return f64::INFINITY;
                }
                let ln = 0.5 * p * df.ln() + ln_gamma(0.5 * (p + 1.0)) + ln_gamma(0.5 * (df - p))
                    - 0.5 * std::f64::consts::PI.ln()
                    - ln_gamma(0.5 * df);
                ((df - 2.0) / df).powf(0.5 * p) * ln.exp()
            }
        }
    }

    /// `E[(|e| - gamma e)^power]` for the symmetric innovation laws used here.
    pub fn asymmetric_power_moment(&self, gamma: f64, power: f64) -> f64 {
        0.5 * ((1.0 - gamma).powf(power) + (1.0 + gamma).powf(power)) * self.abs_moment(power)
    }
}
