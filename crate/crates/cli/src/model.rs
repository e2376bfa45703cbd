use nls_core::gmc::{check_contraction, garch_moment_matrix, random_coefficient_condition, signed_vol_condition, MomentMode};
use nls_core::models::{check_stable, ArmaDriver, Innovation, ModelSpec};

use crate::cli::{Family, InnovationKind, ModelArgs};
use crate::failure::Failure;

fn innovation(args: &ModelArgs) -> Result<Innovation, Failure> {
    let kind = args.innovation.unwrap_or(InnovationKind::Gaussian);
    if args.variance.is_some() && kind != InnovationKind::Gaussian {
        return Err(Failure::usage("--variance only applies to --innovation gaussian"));
    }
    if args.df.is_some() && kind != InnovationKind::StudentT {
        return Err(Failure::usage("--df only applies to --innovation student-t"));
    }
    Ok(match kind {
        InnovationKind::Gaussian => Innovation::Gaussian {
            variance: args.variance.unwrap_or(1.0),
        },
        InnovationKind::Rademacher => Innovation::Rademacher,
        InnovationKind::StudentT => Innovation::StudentT {
            df: args.df.ok_or_else(|| Failure::usage("--innovation student-t needs --df"))?,
        },
        InnovationKind::Uniform => Innovation::Uniform,
    })
}

fn need(v: Option<f64>, flag: &str, model: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::usage(format!("--model {model} needs --{flag}")))
}

/// Model from flags, or `None` when `--model` is absent. Flags that do not
/// belong to the chosen family are rejected.
pub fn spec_from_args(args: &ModelArgs) -> Result<Option<ModelSpec>, Failure> {
    let Some(family) = args.model else {
        let stray = args.innovation.is_some()
            || args.alpha1.is_some()
            || args.alpha0.is_some()
            || !args.ar.is_empty()
            || !args.theta.is_empty()
            || !args.arch.is_empty();
        if stray {
            return Err(Failure::usage("model parameters given without --model"));
        }
        return Ok(None);
    };
    let innovation = innovation(args)?;
    let used = |names: &[&str]| -> Result<(), Failure> {
        let given = [
            ("ar", !args.ar.is_empty()),
            ("ma", !args.ma.is_empty()),
            ("alpha1", args.alpha1.is_some()),
            ("beta1", args.beta1.is_some()),
            ("a", args.a.is_some()),
            ("theta", !args.theta.is_empty()),
            ("alpha0", args.alpha0.is_some()),
            ("arch", !args.arch.is_empty()),
            ("garch", !args.garch.is_empty()),
            ("power", args.power.is_some()),
            ("gamma", args.gamma.is_some()),
        ];
        match given.iter().find(|(name, on)| *on && !names.contains(name)) {
            Some((name, _)) => Err(Failure::usage(format!("--{name} does not apply to this model"))),
            None => Ok(()),
        }
    };
    let spec = match family {
        Family::Iid => {
            used(&[])?;
            ModelSpec::iid(innovation)
        }
        Family::Ar => {
            used(&["ar"])?;
            if args.ar.is_empty() {
                return Err(Failure::usage("--model ar needs --ar (or --phi)"));
            }
            ModelSpec::ar(args.ar.clone(), innovation)
        }
        Family::Arma => {
            used(&["ar", "ma"])?;
            ModelSpec::Arma {
                ar: args.ar.clone(),
                ma: args.ma.clone(),
                driver: ArmaDriver::Innovation(innovation),
            }
        }
        Family::Expar => {
            used(&["alpha1", "beta1", "a"])?;
            ModelSpec::expar(
                need(args.alpha1, "alpha1", "expar")?,
                need(args.beta1, "beta1", "expar")?,
                args.a.unwrap_or(1.0),
                innovation,
            )
        }
        Family::ArArch => {
            used(&["theta"])?;
            let theta: [f64; 5] = args
                .theta
                .clone()
                .try_into()
                .map_err(|_| Failure::usage("--theta needs exactly five values"))?;
            ModelSpec::ArArch { theta, innovation }
        }
        Family::Garch => {
            used(&["alpha0", "arch", "garch", "power", "gamma"])?;
            ModelSpec::AsymGarch {
                alpha0: need(args.alpha0, "alpha0", "garch")?,
                alpha: args.arch.clone(),
                beta: args.garch.clone(),
                power: args.power.unwrap_or(2.0),
                gamma: args.gamma.unwrap_or(0.0),
                innovation,
            }
        }
    };
    Ok(Some(spec))
}

/// Reject models for which no contraction criterion can be verified.
pub fn require_gmc(spec: &ModelSpec) -> Result<(), Failure> {
    let fail = |msg: String| Err(Failure::usage(format!("--require-gmc: {msg}")));
    match spec {
        ModelSpec::Iid { .. } => Ok(()),
        ModelSpec::Ar { coeffs, .. } => check_stable(coeffs).map_err(Failure::from),
        ModelSpec::Arma { ar, driver, .. } => {
            check_stable(ar)?;
            match driver {
                ArmaDriver::Innovation(_) => Ok(()),
                ArmaDriver::Model(inner) => require_gmc(inner),
            }
        }
        ModelSpec::Expar { alpha1, beta1, .. } => {
            let total = alpha1.abs() + beta1.abs();
            if total < 1.0 {
                Ok(())
            } else {
                fail(format!(
                    "expar needs |alpha1| + |beta1| < 1 for geometric moment contraction, got {total}"
                ))
            }
        }
        ModelSpec::ArArch { .. } => {
            // the criterion is order dependent; accept if it holds at 1 or 2
            let mut last = 0.0;
            for alpha in [1.0, 2.0] {
                let v = check_contraction(spec, alpha)?;
                if v.report.satisfied {
                    return Ok(());
                }
                last = v.report.total;
            }
            fail(format!("ar_arch contraction coefficient sum is {last} >= 1 at orders 1 and 2"))
        }
        ModelSpec::AsymGarch { .. } => {
            let r = garch_moment_matrix(spec, 1, MomentMode::Analytic)?;
            if r.satisfied_rho {
                Ok(())
            } else {
                fail(format!("spectral radius of E A is {} >= 1", r.spectral_radius))
            }
        }
        ModelSpec::SignedVol { .. } => {
            let c = signed_vol_condition(spec, 1.0)?;
            if c.satisfied {
                Ok(())
            } else {
                fail(format!(
                    "signed_vol needs E|e|^power < 1 and E|c(e)| < 1, got {} and {}",
                    c.innovation_moment, c.c_moment
                ))
            }
        }
        ModelSpec::Bilinear { .. } | ModelSpec::RcAr { .. } => {
            let c = random_coefficient_condition(spec, 1.0)?;
            if c.satisfied {
                Ok(())
            } else {
                fail(format!("mean coefficient norm {} >= 1", c.mean_norm))
            }
        }
    }
}
