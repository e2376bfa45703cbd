use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};

use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::config::{ExperimentConfig, IndexSelection};
use super::oracle::ReferenceSpectrum;
use super::{Check, ExperimentReport, Table};
use crate::bootstrap::{bootstrap_distribution, mallows_d2, BootstrapConfig};
use crate::error::{Error, Result};
use crate::models::{simulate_with_rng, theoretical_acov, theoretical_spectrum};
use crate::rng::{derive_seed, stream_rng};
use crate::series::TimeSeries;
use crate::spectral::{
    asymptotic_variance, eta_double, expected_estimate, fourier_transform, frequency_grid,
    lag_window_estimate, normalized_periodogram_ks, spectral_second_derivative,
};
use crate::stats;

const SALT_SERIES: u64 = 1;
const SALT_ORACLE: u64 = 2;
const SALT_PROJECTION: u64 = 3;
const SALT_HELD_OUT: u64 = 4;
const SALT_BOOT: u64 = 5;

/// Lags used for the truncated `f''` series in bias-exact.
const SECOND_DERIVATIVE_LAGS: usize = 8192;

fn stage_seed(seed: u64, salt: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(derive_seed(seed, salt), |s, &p| derive_seed(s, p))
}

/// Replication `r` of a stage.
fn replicate(cfg: &ExperimentConfig, stage: u64, r: usize, n: usize) -> Result<TimeSeries<f64>> {
    let mut rng = stream_rng(stage, r as u64);
    let x = simulate_with_rng(&cfg.spec, n, cfg.burn_in, &mut rng)?;
    Ok(if cfg.subtract_mean { x.demeaned() } else { x })
}

fn reference(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<ReferenceSpectrum> {
    let r = ReferenceSpectrum::for_spec(&cfg.spec, &cfg.oracle, derive_seed(cfg.seed, SALT_ORACLE))?;
    if let ReferenceSpectrum::Oracle(o) = &r {
        report.warnings.push(format!(
            "no closed-form spectrum for {}; using a Monte Carlo reference ({} paths of length {}, B = {})",
            cfg.spec.family_name(),
            o.reps,
            o.n_oracle,
            o.bn
        ));
    }
    Ok(r)
}

/// `f_n` at `lambdas` for `reps` replications at sample size `n`;
/// `out[r][l]`.
fn estimate_reps(cfg: &ExperimentConfig, n: usize, bn: usize, lambdas: &[f64]) -> Result<Vec<Vec<f64>>> {
    let stage = stage_seed(cfg.seed, SALT_SERIES, &[n as u64]);
    (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let x = replicate(cfg, stage, r, n)?;
            Ok(lag_window_estimate(&x, cfg.window, bn, lambdas)?.values)
        })
        .collect()
}

fn column(rows: &[Vec<f64>], l: usize) -> Vec<f64> {
    rows.iter().map(|r| r[l]).collect()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.iter().map(|c| c / norm).collect()
}

fn projections(cfg: &ExperimentConfig, m: usize) -> Vec<IndexSelection> {
    if !cfg.index_sets.is_empty() {
        return cfg.index_sets.clone();
    }
    let mut rng = stream_rng(derive_seed(cfg.seed, SALT_PROJECTION), 0);
    (0..cfg.projections)
        .map(|_| {
            let indices: Vec<usize> = sample(&mut rng, 2 * m, cfg.projection_dim)
                .into_iter()
                .map(|i| i + 1)
                .collect();
            let direction: Vec<f64> = (0..indices.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
            IndexSelection { indices, direction }
        })
        .collect()
}

pub(super) fn fourier_clt(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let f = reference(cfg, report)?;
    for &n in &cfg.n {
        let m = (n - 1) / 2;
        let sets = projections(cfg, m);
        let freqs: Vec<usize> = sets
            .iter()
            .flat_map(|s| s.indices.iter().map(|&i| if i > m { i - m } else { i }))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let scale: Vec<f64> = freqs
            .iter()
            .map(|&j| {
                let theta = TAU * j as f64 / n as f64;
                let fv = f.eval(theta);
                if fv > 0.0 && fv.is_finite() {
                    Ok((PI * n as f64 * fv).sqrt())
                } else {
                    Err(Error::NonPositiveReference {
                        frequency: theta,
                        value: fv,
                    })
                }
            })
            .collect::<Result<_>>()?;
        let stage = stage_seed(cfg.seed, SALT_SERIES, &[n as u64]);
        // coords[r][2i] = Re, coords[r][2i+1] = Im at freqs[i]
        let coords = (0..cfg.reps)
            .into_par_iter()
            .map(|r| {
                let x = replicate(cfg, stage, r, n)?;
                let mut out = Vec::with_capacity(2 * freqs.len());
                for (&j, &s) in freqs.iter().zip(&scale) {
                    let z = fourier_transform(x.values(), TAU * j as f64 / n as f64);
                    out.push(z.re / s);
                    out.push(z.im / s);
                }
                Ok(out)
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        let slot = |i: usize| {
            let (j, im) = if i > m { (i - m, 1) } else { (i, 0) };
            2 * freqs.binary_search(&j).expect("frequency collected above") + im
        };
        let mut table = Table::new(&["draw", "ks", "mean", "variance"]);
        let mut worst: f64 = 0.0;
        for (d, sel) in sets.iter().enumerate() {
            let c = unit(&sel.direction);
            let slots: Vec<usize> = sel.indices.iter().map(|&i| slot(i)).collect();
            let z: Vec<f64> = coords
                .iter()
                .map(|row| slots.iter().zip(&c).map(|(&s, ci)| ci * row[s]).sum())
                .collect();
            let ks = stats::ks_normal(&z)?;
            worst = worst.max(ks);
            table.push(vec![d as f64, ks, stats::mean(&z), stats::variance(&z)]);
            report.samples.insert(format!("n{n}_draw{d}"), z);
        }
        report.stat(format!("worst_ks[n={n}]"), worst);
        report.tables.insert(format!("n{n}"), table);
        report.checks.push(Check::below(format!("worst_ks[n={n}]"), worst, cfg.thresholds.ks));
    }
    Ok(())
}

pub(super) fn ecdf_exp(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let f = reference(cfg, report)?;
    for &n in &cfg.n {
        let stage = stage_seed(cfg.seed, SALT_SERIES, &[n as u64]);
        let ks = (0..cfg.reps)
            .into_par_iter()
            .map(|r| {
                let x = replicate(cfg, stage, r, n)?;
                normalized_periodogram_ks(&x, |t| f.eval(t))
            })
            .collect::<Result<Vec<f64>>>()?;
        let med = stats::median(&ks);
        report.stat(format!("ks_median[n={n}]"), med);
        report.stat(format!("ks_mean[n={n}]"), stats::mean(&ks));
        report.stat(format!("ks_max[n={n}]"), ks.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        report.stat("ks_median", med);
        report.checks.push(Check::below(format!("ks_median[n={n}]"), med, cfg.thresholds.ks));
        report.samples.insert(format!("n{n}_ks"), ks);
    }
    Ok(())
}

pub(super) fn density_clt(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let f = reference(cfg, report)?;
    for &n in &cfg.n {
        let bn = cfg.bandwidth.bn(n);
        let rows = estimate_reps(cfg, n, bn, &cfg.lambdas)?;
        let scale = (n as f64 / bn as f64).sqrt();
        let mut table = Table::new(&["lambda", "f", "mean", "variance", "sigma2", "ratio", "ks"]);
        for (l, &lambda) in cfg.lambdas.iter().enumerate() {
            let v = column(&rows, l);
            let centre = stats::mean(&v);
            let g: Vec<f64> = v.iter().map(|x| scale * (x - centre)).collect();
            let fv = f.eval(lambda);
            let sigma2 = asymptotic_variance(fv, lambda, cfg.window);
            let var = stats::variance(&g);
            let ratio = var / sigma2;
            let ks = stats::ks_fitted_normal(&g)?;
            let tol = if eta_double(lambda) == 1.0 {
                cfg.thresholds.variance_tol_zero
            } else {
                cfg.thresholds.variance_tol
            };
            let tag = format!("n={n},lambda={lambda:.6}");
            report.stat(format!("variance_ratio[{tag}]"), ratio);
            // standard error of a sample variance under normality
            report.stat(format!("variance_ratio_se[{tag}]"), ratio * (2.0 / (cfg.reps - 1) as f64).sqrt());
            report.stat(format!("ks[{tag}]"), ks);
            report.checks.push(Check::below(format!("variance_ratio_dev[{tag}]"), (ratio - 1.0).abs(), tol));
            report.checks.push(Check::below(format!("ks_fitted_normal[{tag}]"), ks, cfg.thresholds.ks));
            table.push(vec![lambda, fv, centre, var, sigma2, ratio, ks]);
            report.samples.insert(format!("n{n}_lambda{l}"), g);
        }
        report.stat(format!("bn[n={n}]"), bn as f64);
        report.tables.insert(format!("n{n}"), table);
    }
    Ok(())
}

pub(super) fn joint_indep(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    for &n in &cfg.n {
        let bn = cfg.bandwidth.bn(n);
        let rows = estimate_reps(cfg, n, bn, &cfg.lambdas)?;
        let mut table = Table::new(&["lambda_a", "lambda_b", "correlation"]);
        let mut worst: f64 = 0.0;
        for a in 0..cfg.lambdas.len() {
            for b in a + 1..cfg.lambdas.len() {
                let c = stats::correlation(&column(&rows, a), &column(&rows, b));
                worst = worst.max(c.abs());
                table.push(vec![cfg.lambdas[a], cfg.lambdas[b], c]);
            }
        }
        // correlations of independent samples have sd about 1/sqrt(reps)
        report.stat(format!("max_abs_correlation[n={n}]"), worst);
        report.stat(format!("correlation_se[n={n}]"), 1.0 / (cfg.reps as f64).sqrt());
        report.tables.insert(format!("n{n}"), table);
        report.checks.push(Check::below(format!("max_abs_correlation[n={n}]"), worst, cfg.thresholds.correlation));
        for l in 0..cfg.lambdas.len() {
            report.samples.insert(format!("n{n}_lambda{l}"), column(&rows, l));
        }
    }
    Ok(())
}

pub(super) fn max_dev(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let grid = frequency_grid(cfg.grid_points);
    let mut table = Table::new(&["n", "bn", "mean", "std_error"]);
    let mut means = Vec::with_capacity(cfg.n.len());
    for &n in &cfg.n {
        let bn = cfg.bandwidth.bn(n);
        let rows = estimate_reps(cfg, n, bn, &grid)?;
        let centre: Vec<f64> = (0..grid.len()).map(|l| stats::mean(&column(&rows, l))).collect();
        let norm = (n as f64 / bn as f64).sqrt() / (n as f64).ln().sqrt();
        let maxima: Vec<f64> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&centre)
                    .map(|(v, c)| (v - c).abs())
                    .fold(0.0, f64::max)
                    * norm
            })
            .collect();
        let (m, se) = (stats::mean(&maxima), stats::std_error(&maxima));
        report.stat(format!("max_dev[n={n}]"), m);
        report.stat(format!("max_dev_se[n={n}]"), se);
        table.push(vec![n as f64, bn as f64, m, se]);
        report.samples.insert(format!("n{n}_max_dev"), maxima);
        means.push(m);
    }
    report.tables.insert("trend".into(), table);
    if means.len() >= 2 {
        let ratio = means[means.len() - 1] / means[0];
        report.stat("growth_ratio", ratio);
        report.checks.push(Check::below("growth_ratio", ratio, cfg.thresholds.growth_ratio));
    } else {
        report.warnings.push("max-dev with a single n has no trend to check".into());
        report.checks.push(Check::below("max_dev_finite", 0.0, if means[0].is_finite() { 1.0 } else { 0.0 }));
    }
    Ok(())
}

pub(super) fn bootstrap_consistency(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let f = reference(cfg, report)?;
    let lambda = cfg.lambdas[0];
    let fv = f.eval(lambda);
    let sigma2 = asymptotic_variance(fv, lambda, cfg.window);
    let mut table = Table::new(&["repetition", "n", "bn", "bn_pilot", "d2", "variance_ratio"]);
    // d2[q][i], ratio[q][i] for n = cfg.n[i]
    let mut d2 = vec![vec![0.0; cfg.n.len()]; cfg.repetitions];
    let mut ratios = vec![vec![0.0; cfg.n.len()]; cfg.repetitions];
    for q in 0..cfg.repetitions {
        for (i, &n) in cfg.n.iter().enumerate() {
            let bn = cfg.bandwidth.bn(n);
            let bn_pilot = cfg.pilot_bandwidth.bn(n);
            let scale = (n as f64 / bn as f64).sqrt();
            let stage = stage_seed(cfg.seed, SALT_SERIES, &[q as u64, n as u64]);
            let mc = (0..cfg.reps)
                .into_par_iter()
                .map(|r| {
                    let x = replicate(cfg, stage, r, n)?;
                    Ok(scale * (lag_window_estimate(&x, cfg.window, bn, &[lambda])?.values[0] - fv))
                })
                .collect::<Result<Vec<f64>>>()?;
            let held_out = replicate(cfg, stage_seed(cfg.seed, SALT_HELD_OUT, &[q as u64, n as u64]), 0, n)?;
            let boot_cfg = BootstrapConfig {
                window: cfg.window,
                bn,
                bn_pilot,
                variant: cfg.variant,
                n_boot: cfg.n_boot,
                seed: stage_seed(cfg.seed, SALT_BOOT, &[q as u64, n as u64]),
            };
            let boot = bootstrap_distribution(&held_out, &boot_cfg, lambda)?;
            d2[q][i] = mallows_d2(&mc, &boot.samples)?;
            ratios[q][i] = stats::variance(&boot.samples) / sigma2;
            table.push(vec![q as f64, n as f64, bn as f64, bn_pilot as f64, d2[q][i], ratios[q][i]]);
            if q == 0 {
                report.samples.insert(format!("n{n}_monte_carlo"), mc);
                report.samples.insert(format!("n{n}_bootstrap"), boot.samples);
            }
        }
    }
    for (i, &n) in cfg.n.iter().enumerate() {
        let col_d: Vec<f64> = d2.iter().map(|r| r[i]).collect();
        let col_v: Vec<f64> = ratios.iter().map(|r| r[i]).collect();
        report.stat(format!("median_d2[n={n}]"), stats::median(&col_d));
        report.stat(format!("median_variance_ratio[n={n}]"), stats::median(&col_v));
        if cfg.repetitions >= 2 {
            report.stat(format!("d2_se[n={n}]"), stats::std_error(&col_d));
            report.stat(format!("variance_ratio_se[n={n}]"), stats::std_error(&col_v));
        }
    }
    let last = cfg.n.len() - 1;
    let ratio_med = stats::median(&ratios.iter().map(|r| r[last]).collect::<Vec<_>>());
    report.checks.push(Check::below(
        format!("variance_ratio_dev[n={}]", cfg.n[last]),
        (ratio_med - 1.0).abs(),
        cfg.thresholds.variance_tol,
    ));
    if last > 0 {
        let wins = d2.iter().filter(|r| r[last] < r[0]).count();
        let frac = wins as f64 / cfg.repetitions as f64;
        report.stat("d2_wins", wins as f64);
        report.checks.push(Check::at_least("d2_decrease_fraction", frac, cfg.thresholds.win_fraction));
    } else {
        report.warnings.push("bootstrap-consistency with a single n has no d2 trend to check".into());
    }
    report.stat("sigma2", sigma2);
    report.stat("f_lambda", fv);
    report.tables.insert("repetitions".into(), table);
    Ok(())
}

pub(super) fn bias_exact(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let c2 = cfg.window.require_c2()?;
    let acov = theoretical_acov(&cfg.spec, SECOND_DERIVATIVE_LAGS)?;
    let lambda = cfg.lambdas[0];
    let fv = theoretical_spectrum(&cfg.spec, lambda)?;
    let f_dd = spectral_second_derivative(&acov, lambda);
    if f_dd == 0.0 {
        return Err(Error::param(format!("f'' vanishes at lambda = {lambda}; the bias ratio is undefined")));
    }
    let n = cfg.max_n();
    let mut table = Table::new(&["bn", "expected", "scaled_bias", "ratio", "deviation"]);
    let mut devs = Vec::with_capacity(cfg.bn_list.len());
    for &bn in &cfg.bn_list {
        let e = expected_estimate(&acov, n, cfg.window, bn, lambda)?;
        let scaled = (bn * bn) as f64 * (e - fv);
        let ratio = scaled / (c2 * f_dd);
        let dev = (ratio - 1.0).abs();
        report.stat(format!("ratio[bn={bn}]"), ratio);
        table.push(vec![bn as f64, e, scaled, ratio, dev]);
        devs.push(dev);
    }
    report.stat("f", fv);
    report.stat("f_second_derivative", f_dd);
    report.tables.insert("bias".into(), table);
    let last = cfg.bn_list[cfg.bn_list.len() - 1];
    report.checks.push(Check::below(format!("bias_ratio_dev[bn={last}]"), devs[devs.len() - 1], cfg.thresholds.bias_tol));
    if devs.len() > 1 {
        report.checks.push(Check::holds("bias_ratio_dev_decreasing", devs.windows(2).all(|w| w[1] < w[0])));
    }
    Ok(())
}
