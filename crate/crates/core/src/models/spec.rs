use serde::{Deserialize, Serialize};

use super::innovation::Innovation;
use crate::error::{Error, Result};

/// Deterministic scalar function of an innovation draw, used by the signed
/// volatility recursion `s_t = g(e_{t-1}) + c(e_{t-1}) s_{t-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnovationMap {
    Constant { value: f64 },
    /// `intercept + slope * e`
    Affine { intercept: f64, slope: f64 },
    /// `intercept + scale * |e|^power`
    AbsPower { intercept: f64, scale: f64, power: f64 },
}

impl InnovationMap {
    #[inline]
    pub fn eval(&self, e: f64) -> f64 {
        match *self {
            InnovationMap::Constant { value } => value,
            InnovationMap::Affine { intercept, slope } => intercept + slope * e,
            InnovationMap::AbsPower {
                intercept,
                scale,
                power,
            } => intercept + scale * e.abs().powf(power),
        }
    }

    /// True when the map is nonnegative for every innovation value.
    pub fn is_nonnegative(&self) -> bool {
        match *self {
            InnovationMap::Constant { value } => value >= 0.0,
            InnovationMap::Affine { intercept, slope } => intercept >= 0.0 && slope == 0.0,
            InnovationMap::AbsPower {
                intercept, scale, ..
            } => intercept >= 0.0 && scale >= 0.0,
        }
    }

    /// Closed-form mean under `innovation`.
    pub fn mean(&self, innovation: &Innovation) -> f64 {
        match *self {
            InnovationMap::Constant { value } => value,
            InnovationMap::Affine { intercept, .. } => intercept,
            InnovationMap::AbsPower {
                intercept,
                scale,
                power,
            } => intercept + scale * innovation.abs_moment(power),
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let ok = match *self {
            InnovationMap::Constant { value } => value.is_finite(),
            InnovationMap::Affine { intercept, slope } => intercept.is_finite() && slope.is_finite(),
            InnovationMap::AbsPower {
                intercept,
                scale,
                power,
            } => intercept.is_finite() && scale.is_finite() && power.is_finite() && power >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("signed_vol {name}-map has invalid parameters")))
        }
    }
}

/// Input process filtered by an ARMA recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmaDriver {
    Innovation(Innovation),
    Model(Box<ModelSpec>),
}

impl Default for ArmaDriver {
    fn default() -> Self {
        ArmaDriver::Innovation(Innovation::default())
    }
}

/// One stochastic recursion `X_{t} = R(X_{t-1}, ..., X_{t-p}; e_t)` together
/// with its innovation law.
///
/// ARMA recursions use the convention
/// `X_t - sum theta_k X_{t-k} = eta_t - sum phi_k eta_{t-k}`, i.e. both the AR
/// and the MA coefficients enter with a minus sign on the polynomial side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Iid {
        #[serde(default)]
        innovation: Innovation,
    },
    Ar {
        coeffs: Vec<f64>,
        #[serde(default)]
        innovation: Innovation,
    },
    Arma {
        ar: Vec<f64>,
        ma: Vec<f64>,
        #[serde(default)]
        driver: ArmaDriver,
    },
    /// `X_t = (alpha1 + beta1 exp(-a X_{t-1}^2)) X_{t-1} + e_t`
    Expar {
        alpha1: f64,
        beta1: f64,
        a: f64,
        #[serde(default)]
        innovation: Innovation,
    },
    /// AR(2) with ARCH(2) errors:
    /// `X_t = t1 X_{t-1} + t2 X_{t-2} + e_t sqrt(t3^2 + t4^2 X_{t-1}^2 + t5^2 X_{t-2}^2)`
    ArArch {
        theta: [f64; 5],
        #[serde(default)]
        innovation: Innovation,
    },
    /// Subdiagonal bilinear model
    /// `X_t = sum_j a_j X_{t-j} + sum_{j>=0} c_j e_{t-j} + sum_{j>=0,k>=1} b_{jk} X_{t-j-k} e_{t-k}`.
    /// `c[0]` multiplies `e_t`; `b[j][k-1]` holds `b_{jk}`.
    Bilinear {
        a: Vec<f64>,
        c: Vec<f64>,
        b: Vec<Vec<f64>>,
        #[serde(default)]
        innovation: Innovation,
    },
    /// Asymmetric power GARCH(r, s):
    /// `X_t = e_t sqrt(h_t)`,
    /// `h_t^{p/2} = alpha0 + sum alpha_j (|X_{t-j}| - gamma X_{t-j})^p + sum beta_j h_{t-j}^{p/2}`.
    AsymGarch {
        alpha0: f64,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        power: f64,
        gamma: f64,
        #[serde(default)]
        innovation: Innovation,
    },
    /// `X_t = e_t |s_t|^{1/power}`, `s_t = g(e_{t-1}) + c(e_{t-1}) s_{t-1}`.
    SignedVol {
        g: InnovationMap,
        c: InnovationMap,
        power: f64,
        #[serde(default)]
        innovation: Innovation,
    },
    /// Random coefficient vector autoregression
    /// `Z_t = (A + B e_t) Z_{t-1} + c e_t + d e_t^2`, observed through `X_t = Z_t[0]`.
    RcAr {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        c: Vec<f64>,
        d: Vec<f64>,
        #[serde(default)]
        innovation: Innovation,
    },
}

fn finite(name: &str, xs: &[f64]) -> Result<()> {
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(Error::param(format!("{name} contains non-finite value {x}")));
    }
    Ok(())
}

fn square(name: &str, m: &[Vec<f64>], dim: usize) -> Result<()> {
    if m.len() != dim || m.iter().any(|row| row.len() != dim) {
        return Err(Error::param(format!("{name} must be a {dim}x{dim} matrix")));
    }
    m.iter().try_for_each(|row| finite(name, row))
}

impl ModelSpec {
    pub fn iid(innovation: Innovation) -> Self {
        ModelSpec::Iid { innovation }
    }

    pub fn ar(coeffs: Vec<f64>, innovation: Innovation) -> Self {
        ModelSpec::Ar { coeffs, innovation }
    }

    pub fn expar(alpha1: f64, beta1: f64, a: f64, innovation: Innovation) -> Self {
        ModelSpec::Expar {
            alpha1,
            beta1,
            a,
            innovation,
        }
    }

    /// Linear GARCH(r, s) is the `power = 2`, `gamma = 0` case.
    pub fn garch(alpha0: f64, alpha: Vec<f64>, beta: Vec<f64>, innovation: Innovation) -> Self {
        ModelSpec::AsymGarch {
            alpha0,
            alpha,
            beta,
            power: 2.0,
            gamma: 0.0,
            innovation,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            ModelSpec::Iid { .. } => "iid",
            ModelSpec::Ar { .. } => "ar",
            ModelSpec::Arma { .. } => "arma",
            ModelSpec::Expar { .. } => "expar",
            ModelSpec::ArArch { .. } => "ar_arch",
            ModelSpec::Bilinear { .. } => "bilinear",
            ModelSpec::AsymGarch { .. } => "asym_garch",
            ModelSpec::SignedVol { .. } => "signed_vol",
            ModelSpec::RcAr { .. } => "rc_ar",
        }
    }

    /// Innovation law that drives one step of the recursion.
    pub fn innovation(&self) -> Innovation {
        match self {
            ModelSpec::Iid { innovation }
            | ModelSpec::Ar { innovation, .. }
            | ModelSpec::Expar { innovation, .. }
            | ModelSpec::ArArch { innovation, .. }
            | ModelSpec::Bilinear { innovation, .. }
            | ModelSpec::AsymGarch { innovation, .. }
            | ModelSpec::SignedVol { innovation, .. }
            | ModelSpec::RcAr { innovation, .. } => *innovation,
            ModelSpec::Arma { driver, .. } => match driver {
                ArmaDriver::Innovation(i) => *i,
                ArmaDriver::Model(m) => m.innovation(),
            },
        }
    }

    /// Families whose output is a martingale difference sequence.
    pub fn is_martingale_difference(&self) -> bool {
        matches!(
            self,
            ModelSpec::Iid { .. } | ModelSpec::AsymGarch { .. } | ModelSpec::SignedVol { .. }
        )
    }

    /// Check the parameter domain of the family.
    pub fn validate(&self) -> Result<()> {
        self.innovation().validate()?;
        match self {
            ModelSpec::Iid { .. } => Ok(()),
            ModelSpec::Ar { coeffs, .. } => {
                finite("ar coeffs", coeffs)?;
                super::linear::check_stable(coeffs)
            }
            ModelSpec::Arma { ar, ma, driver } => {
                finite("arma ar", ar)?;
                finite("arma ma", ma)?;
                super::linear::check_stable(ar)?;
                if let ArmaDriver::Model(m) = driver {
                    m.validate()?;
                }
                Ok(())
            }
            ModelSpec::Expar {
                alpha1, beta1, a, ..
            } => {
                finite("expar", &[*alpha1, *beta1, *a])?;
                if *a <= 0.0 {
                    return Err(Error::param(format!("expar needs a > 0, got {a}")));
                }
                Ok(())
            }
            ModelSpec::ArArch { theta, .. } => finite("ar_arch theta", theta),
            ModelSpec::Bilinear { a, c, b, .. } => {
                finite("bilinear a", a)?;
                finite("bilinear c", c)?;
                if c.is_empty() {
                    return Err(Error::param("bilinear needs c_0 (coefficient of e_t)"));
                }
                b.iter().try_for_each(|row| finite("bilinear b", row))
            }
            ModelSpec::AsymGarch {
                alpha0,
                alpha,
                beta,
                power,
                gamma,
                ..
            } => {
                finite("asym_garch", &[*alpha0, *power, *gamma])?;
                finite("asym_garch alpha", alpha)?;
                finite("asym_garch beta", beta)?;
                if *alpha0 <= 0.0 {
                    return Err(Error::param(format!("asym_garch needs alpha0 > 0, got {alpha0}")));
                }
                if alpha.iter().chain(beta.iter()).any(|&v| v < 0.0) {
                    return Err(Error::param("asym_garch needs alpha_j >= 0 and beta_j >= 0"));
                }
                if !alpha.iter().any(|&v| v > 0.0) {
                    return Err(Error::param("asym_garch needs at least one alpha_j > 0"));
                }
                if *power < 1.0 {
                    return Err(Error::param(format!("asym_garch needs power >= 1, got {power}")));
                }
                if gamma.abs() >= 1.0 {
                    return Err(Error::param(format!("asym_garch needs |gamma| < 1, got {gamma}")));
                }
                Ok(())
            }
            ModelSpec::SignedVol { g, c, power, .. } => {
                g.validate("g")?;
                c.validate("c")?;
                if !(power.is_finite() && *power >= 1.0) {
                    return Err(Error::param(format!("signed_vol needs power >= 1, got {power}")));
                }
                Ok(())
            }
            ModelSpec::RcAr { a, b, c, d, .. } => {
                let dim = a.len();
                if dim == 0 {
                    return Err(Error::param("rc_ar needs a nonempty state"));
                }
                square("rc_ar a", a, dim)?;
                square("rc_ar b", b, dim)?;
                if c.len() != dim || d.len() != dim {
                    return Err(Error::param(format!("rc_ar c and d must have length {dim}")));
                }
                finite("rc_ar c", c)?;
                finite("rc_ar d", d)
            }
        }
    }

    /// Moment caveats that do not make the spec invalid but undermine
    /// fourth/eighth-moment based checks.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Innovation::StudentT { df } = self.innovation() {
            if df <= 4.0 {
                out.push(format!("student_t innovation with df = {df} has no finite fourth moment"));
            } else if df <= 8.0 {
                out.push(format!(
                    "student_t innovation with df = {df} has no finite eighth moment; \
                     bootstrap and density checks assume eighth moments"
                ));
            }
        }
        if let ModelSpec::SignedVol {
            power, innovation, ..
        } = self
        {
            let m = innovation.abs_moment(*power);
            if m >= 1.0 {
                out.push(format!(
                    "signed_vol: E|e|^power = {m:.4} >= 1, so the moment hypothesis of the \
                     contraction criterion fails at alpha = 1"
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_checks() {
        let g = Innovation::default();
        assert!(ModelSpec::expar(0.5, 0.3, 0.0, g).validate().is_err());
        assert!(ModelSpec::expar(0.5, 0.3, 1.0, g).validate().is_ok());
        assert!(ModelSpec::garch(0.0, vec![0.1], vec![0.8], g).validate().is_err());
        assert!(ModelSpec::garch(0.1, vec![0.0], vec![0.8], g).validate().is_err());
        assert!(ModelSpec::garch(0.1, vec![0.1], vec![-0.1], g).validate().is_err());
        let asym = ModelSpec::AsymGarch {
            alpha0: 0.1,
            alpha: vec![0.1],
            beta: vec![0.8],
            power: 2.0,
            gamma: 1.0,
            innovation: g,
        };
        assert!(asym.validate().is_err());
        assert!(ModelSpec::ar(vec![1.5], g).validate().is_err());
        let rc = ModelSpec::RcAr {
            a: vec![vec![0.5]],
            b: vec![vec![0.1, 0.0]],
            c: vec![1.0],
            d: vec![0.0],
            innovation: g,
        };
        assert!(rc.validate().is_err());
    }

    #[test]
    fn student_t_with_low_df_is_flagged() {
        let spec = ModelSpec::iid(Innovation::StudentT { df: 6.0 });
        assert!(spec.validate().is_ok());
        assert_eq!(spec.warnings().len(), 1);
        assert!(ModelSpec::iid(Innovation::StudentT { df: 10.0 }).warnings().is_empty());
    }
}
