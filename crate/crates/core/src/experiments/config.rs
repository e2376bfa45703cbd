use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bootstrap::Variant;
use crate::error::{Error, Result};
use crate::models::{Innovation, ModelSpec};
use crate::spectral::{Window, DEFAULT_GRID_POINTS};
use crate::DEFAULT_BURN_IN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FourierClt,
    EcdfExp,
    DensityClt,
    JointIndep,
    MaxDev,
    BootstrapConsistency,
    BiasExact,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::FourierClt,
        ExperimentKind::EcdfExp,
        ExperimentKind::DensityClt,
        ExperimentKind::JointIndep,
        ExperimentKind::MaxDev,
        ExperimentKind::BootstrapConsistency,
        ExperimentKind::BiasExact,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::FourierClt => "fourier-clt",
            ExperimentKind::EcdfExp => "ecdf-exp",
            ExperimentKind::DensityClt => "density-clt",
            ExperimentKind::JointIndep => "joint-indep",
            ExperimentKind::MaxDev => "max-dev",
            ExperimentKind::BootstrapConsistency => "bootstrap-consistency",
            ExperimentKind::BiasExact => "bias-exact",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
                Error::Config(format!("unknown experiment kind {s:?}; valid kinds: {}", names.join(", ")))
            })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Truncation lag as a function of the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BandwidthRule {
    Fixed { bn: usize },
    /// `round(scale * n^exponent)`
    Power { scale: f64, exponent: f64 },
}

impl BandwidthRule {
    /// Lag for sample size `n`, clamped to `1..n`.
    pub fn bn(&self, n: usize) -> usize {
        let raw = match *self {
            BandwidthRule::Fixed { bn } => bn,
            BandwidthRule::Power { scale, exponent } => (scale * (n as f64).powf(exponent)).round() as usize,
        };
        raw.clamp(1, n.saturating_sub(1).max(1))
    }

    fn validate(&self, name: &str) -> Result<()> {
        let ok = match *self {
            BandwidthRule::Fixed { bn } => bn >= 1,
            BandwidthRule::Power { scale, exponent } => scale > 0.0 && exponent > 0.0 && exponent < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid {name} rule {self:?}")))
        }
    }
}

/// Monte Carlo reference spectrum settings for families without a closed
/// form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    pub n_oracle: usize,
    pub reps: usize,
    /// Upper bound on `n_oracle * reps`.
    pub budget: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            n_oracle: 1 << 16,
            reps: 16,
            budget: 1 << 24,
        }
    }
}

/// Pass/fail tolerances. Only the fields relevant to a kind are used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Upper bound on a KS distance.
    pub ks: f64,
    /// Relative tolerance on a variance ratio at interior frequencies.
    pub variance_tol: f64,
    /// Relative tolerance on a variance ratio at multiples of pi.
    pub variance_tol_zero: f64,
    /// Upper bound on an absolute correlation.
    pub correlation: f64,
    /// Upper bound on the largest-n to smallest-n ratio of max deviations.
    pub growth_ratio: f64,
    /// Relative tolerance on the bias ratio at the largest truncation lag.
    pub bias_tol: f64,
    /// Fraction of repetitions in which the distance must shrink.
    pub win_fraction: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            ks: 0.05,
            variance_tol: 0.25,
            variance_tol_zero: 0.30,
            correlation: 0.15,
            growth_ratio: 1.3,
            bias_tol: 0.15,
            win_fraction: 0.8,
        }
    }
}

impl Thresholds {
    fn validate(&self) -> Result<()> {
        let all = [
            ("ks", self.ks),
            ("variance_tol", self.variance_tol),
            ("variance_tol_zero", self.variance_tol_zero),
            ("correlation", self.correlation),
            ("growth_ratio", self.growth_ratio),
            ("bias_tol", self.bias_tol),
            ("win_fraction", self.win_fraction),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("threshold {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Explicit projection for fourier-clt: coordinates `1..=m` pick
/// `Re S(theta_j)`, `m+1..=2m` pick `Im S(theta_{j-m})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSelection {
    pub indices: Vec<usize>,
    /// Normalised to unit length before use.
    pub direction: Vec<f64>,
}

/// One verification run. [`ExperimentConfig::preset`] gives the defaults
/// for each kind; every field can be overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub spec: ModelSpec,
    /// Sample sizes; increasing when more than one.
    pub n: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub burn_in: usize,
    pub window: Window,
    pub bandwidth: BandwidthRule,
    pub pilot_bandwidth: BandwidthRule,
    /// Truncation lags for bias-exact.
    pub bn_list: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub grid_points: usize,
    /// Number of random (index set, direction) draws for fourier-clt.
    pub projections: usize,
    /// Size of each index set for fourier-clt.
    pub projection_dim: usize,
    /// Replaces the random draws when non-empty.
    #[serde(default)]
    pub index_sets: Vec<IndexSelection>,
    pub n_boot: usize,
    pub variant: Variant,
    /// Independent outer repetitions for bootstrap-consistency.
    pub repetitions: usize,
    pub subtract_mean: bool,
    pub oracle: OracleSettings,
    pub thresholds: Thresholds,
}

/// Minimum replications for distributional comparisons.
pub const MIN_DISTRIBUTION_REPS: usize = 100;

impl ExperimentConfig {
    pub fn preset(kind: ExperimentKind) -> Self {
        let g = Innovation::standard_gaussian();
        let mut c = ExperimentConfig {
            kind,
            spec: ModelSpec::iid(g),
            n: vec![1024],
            reps: 400,
            seed: 20_240_601,
            burn_in: DEFAULT_BURN_IN,
            window: Window::Parzen,
            bandwidth: BandwidthRule::Fixed { bn: 32 },
            pilot_bandwidth: BandwidthRule::Power {
                scale: 1.0,
                exponent: 0.15,
            },
            bn_list: Vec::new(),
            lambdas: vec![PI / 2.0],
            grid_points: DEFAULT_GRID_POINTS,
            projections: 5,
            projection_dim: 2,
            index_sets: Vec::new(),
            n_boot: 400,
            variant: Variant::Residual,
            repetitions: 10,
            subtract_mean: false,
            oracle: OracleSettings::default(),
            thresholds: Thresholds::default(),
        };
        match kind {
            ExperimentKind::FourierClt => {
                c.reps = 1000;
                c.thresholds.ks = 0.06;
            }
            ExperimentKind::EcdfExp => {
                c.spec = ModelSpec::expar(0.5, 0.3, 1.0, g);
                c.n = vec![4096];
                c.reps = 20;
            }
            ExperimentKind::DensityClt => {
                c.n = vec![1 << 14];
                c.lambdas = vec![PI / 2.0, 0.0];
                c.thresholds.ks = 0.07;
            }
            ExperimentKind::JointIndep => {
                c.n = vec![1 << 14];
                c.lambdas = vec![PI / 4.0, 3.0 * PI / 4.0];
            }
            ExperimentKind::MaxDev => {
                c.n = vec![1 << 12, 1 << 14, 1 << 16];
                c.reps = 100;
                c.bandwidth = BandwidthRule::Power {
                    scale: 1.0,
                    exponent: 0.3,
                };
            }
            ExperimentKind::BootstrapConsistency => {
                c.spec = ModelSpec::ar(vec![0.5], g);
                c.n = vec![512, 2048];
                c.reps = 2000;
                c.n_boot = 2000;
                c.bandwidth = BandwidthRule::Power {
                    scale: 5.0,
                    exponent: 0.2,
                };
                c.pilot_bandwidth = BandwidthRule::Power {
                    scale: 4.0,
                    exponent: 0.15,
                };
                c.thresholds.variance_tol = 0.30;
            }
            ExperimentKind::BiasExact => {
                c.spec = ModelSpec::ar(vec![0.5], g);
                c.n = vec![1 << 15];
                c.bn_list = vec![8, 16, 32];
                c.lambdas = vec![PI / 3.0];
            }
        }
        c
    }

    /// Largest sample size in the list.
    pub fn max_n(&self) -> usize {
        self.n.iter().copied().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.thresholds.validate()?;
        self.bandwidth.validate("bandwidth")?;
        self.pilot_bandwidth.validate("pilot_bandwidth")?;
        if self.n.is_empty() || self.n.iter().any(|&n| n < 2) {
            return Err(Error::Config("n must list sample sizes of at least 2".into()));
        }
        if self.n.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n-list must be strictly increasing".into()));
        }
        if self.lambdas.iter().any(|l| !(0.0..=PI).contains(l)) {
            return Err(Error::Config("frequencies must lie in [0, pi]".into()));
        }
        let need_reps = |min: usize| {
            if self.reps < min {
                Err(Error::InsufficientReplications {
                    kind: self.kind.name(),
                    got: self.reps,
                    min,
                })
            } else {
                Ok(())
            }
        };
        let need_lambdas = |min: usize| {
            if self.lambdas.len() < min {
                Err(Error::Config(format!("{} needs at least {min} frequencies", self.kind)))
            } else {
                Ok(())
            }
        };
        match self.kind {
            ExperimentKind::FourierClt => {
                need_reps(MIN_DISTRIBUTION_REPS)?;
                if self.projections < 1 || self.projection_dim < 1 {
                    return Err(Error::Config("fourier-clt needs projections >= 1 and projection_dim >= 1".into()));
                }
                let m = (self.n[0] - 1) / 2;
                for sel in &self.index_sets {
                    if sel.indices.is_empty()
                        || sel.indices.len() != sel.direction.len()
                        || sel.indices.iter().any(|&i| i < 1 || i > 2 * m)
                    {
                        return Err(Error::Config(format!(
                            "index set {:?} must be non-empty, within 1..={} and match its direction",
                            sel.indices,
                            2 * m
                        )));
                    }
                    let mut sorted = sel.indices.clone();
                    sorted.sort_unstable();
                    sorted.dedup();
                    let norm: f64 = sel.direction.iter().map(|c| c * c).sum();
                    if sorted.len() != sel.indices.len() || !(norm > 0.0 && norm.is_finite()) {
                        return Err(Error::Config("index sets need distinct indices and a non-zero direction".into()));
                    }
                }
                if self.index_sets.is_empty() && self.projection_dim > 2 * m {
                    return Err(Error::Config(format!(
                        "projection_dim {} exceeds the {} available coordinates",
                        self.projection_dim,
                        2 * m
                    )));
                }
            }
            ExperimentKind::EcdfExp => need_reps(1)?,
            ExperimentKind::DensityClt => {
                need_reps(MIN_DISTRIBUTION_REPS)?;
                need_lambdas(1)?;
            }
            ExperimentKind::JointIndep => {
                need_reps(MIN_DISTRIBUTION_REPS)?;
                need_lambdas(2)?;
            }
            ExperimentKind::MaxDev => {
                need_reps(10)?;
                if self.grid_points < 2 {
                    return Err(Error::Config("max-dev needs at least two grid points".into()));
                }
            }
            ExperimentKind::BootstrapConsistency => {
                need_reps(MIN_DISTRIBUTION_REPS)?;
                need_lambdas(1)?;
                if self.n_boot < MIN_DISTRIBUTION_REPS {
                    return Err(Error::InsufficientReplications {
                        kind: "bootstrap-consistency n_boot",
                        got: self.n_boot,
                        min: MIN_DISTRIBUTION_REPS,
                    });
                }
                if self.repetitions < 1 {
                    return Err(Error::Config("bootstrap-consistency needs repetitions >= 1".into()));
                }
                self.window.require_c2()?;
                self.window.require_nonneg()?;
            }
            ExperimentKind::BiasExact => {
                need_lambdas(1)?;
                if self.bn_list.is_empty() || self.bn_list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config("bias-exact needs a strictly increasing bn_list".into()));
                }
                self.window.require_c2()?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for k in ExperimentKind::ALL {
            ExperimentConfig::preset(k).validate().unwrap();
            assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        }
        let e = "nope".parse::<ExperimentKind>().unwrap_err().to_string();
        assert!(e.contains("bias-exact") && e.contains("fourier-clt"));
    }

    #[test]
    fn density_clt_needs_100_reps() {
        let mut c = ExperimentConfig::preset(ExperimentKind::DensityClt);
        c.reps = 2;
        assert!(matches!(c.validate(), Err(Error::InsufficientReplications { got: 2, min: 100, .. })));
    }

    #[test]
    fn thresholds_must_be_positive() {
        let mut c = ExperimentConfig::preset(ExperimentKind::MaxDev);
        c.thresholds.growth_ratio = 0.0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::preset(ExperimentKind::MaxDev);
        c.n = vec![4096, 1024];
        assert!(c.validate().is_err());
    }

    #[test]
    fn bandwidth_rules() {
        let r = BandwidthRule::Power {
            scale: 1.0,
            exponent: 0.3,
        };
        assert_eq!(r.bn(1 << 12), 12);
        assert_eq!(r.bn(1 << 16), 28);
        assert_eq!(BandwidthRule::Fixed { bn: 50 }.bn(10), 9);
    }
}
