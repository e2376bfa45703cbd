//! Seeded Monte Carlo checks of the limit theorems.
//!
//! Each [`ExperimentKind`] simulates replications of a model, computes the
//! statistic the corresponding limit result is about, and compares it with
//! thresholds from the [`ExperimentConfig`]. Every replication draws from
//! its own random stream, so reports are bit-identical for a given config
//! regardless of thread count.

mod config;
mod kinds;
mod oracle;
mod scaling;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use config::{
    BandwidthRule, ExperimentConfig, ExperimentKind, IndexSelection, OracleSettings, Thresholds,
    MIN_DISTRIBUTION_REPS,
};
pub use oracle::{oracle_spectrum, OracleSpectrum, ReferenceSpectrum};
pub use scaling::{block_sum_scaling, BlockScalingPoint, BlockScalingReport};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
}

/// One pass/fail gate: `value relation threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: Relation::Below,
            threshold,
            // NaN fails
            pass: value < threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            threshold,
            pass: value >= threshold,
        }
    }

    /// Boolean gate recorded as `1 >= 1` or `0 >= 1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

/// Column-labelled numeric table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    /// True iff every check passes.
    pub pass: bool,
    pub checks: Vec<Check>,
    /// Summary statistics, standard errors under `*_se` keys.
    pub stats: BTreeMap<String, f64>,
    pub tables: BTreeMap<String, Table>,
    /// Raw replicate samples, written out separately by the CLI.
    #[serde(default, skip_serializing)]
    pub samples: BTreeMap<String, Vec<f64>>,
    pub warnings: Vec<String>,
    pub config: ExperimentConfig,
}

impl ExperimentReport {
    fn new(config: &ExperimentConfig) -> Self {
        ExperimentReport {
            kind: config.kind,
            pass: false,
            checks: Vec::new(),
            stats: BTreeMap::new(),
            tables: BTreeMap::new(),
            samples: BTreeMap::new(),
            warnings: config.spec.warnings(),
            config: config.clone(),
        }
    }

    fn stat(&mut self, key: impl Into<String>, value: f64) {
        self.stats.insert(key.into(), value);
    }

    fn finish(mut self) -> Self {
        self.pass = !self.checks.is_empty() && self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Validate `config` and run it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut report = ExperimentReport::new(config);
    match config.kind {
        ExperimentKind::FourierClt => kinds::fourier_clt(config, &mut report)?,
        ExperimentKind::EcdfExp => kinds::ecdf_exp(config, &mut report)?,
        ExperimentKind::DensityClt => kinds::density_clt(config, &mut report)?,
        ExperimentKind::JointIndep => kinds::joint_indep(config, &mut report)?,
        ExperimentKind::MaxDev => kinds::max_dev(config, &mut report)?,
        ExperimentKind::BootstrapConsistency => kinds::bootstrap_consistency(config, &mut report)?,
        ExperimentKind::BiasExact => kinds::bias_exact(config, &mut report)?,
    }
    Ok(report.finish())
}
