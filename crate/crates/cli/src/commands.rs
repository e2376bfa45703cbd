use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use nls_core::bootstrap::{bootstrap_distribution, default_bandwidths, mallows_d2, BootstrapConfig, ResidualDiagnostics, Variant};
use nls_core::experiments::{run_experiment, BandwidthRule, ExperimentConfig};
use nls_core::gmc::{check_contraction, estimate_decay, garch_moment_matrix, MomentMode};
use nls_core::models::{simulate, Innovation, ModelSpec};
use nls_core::spectral::{
    asymptotic_variance, estimate_from_periodogram, frequency_grid, lag_window_estimate, oversampled_periodogram,
    periodogram, Window, DEFAULT_GRID_POINTS,
};
use nls_core::rng::derive_seed;
use nls_core::{stats, TimeSeries, DEFAULT_BURN_IN};
use serde::{Deserialize, Serialize};

use crate::cli::{BootstrapArgs, CommonArgs, ContractionArgs, GarchConditionArgs, GmcDecayArgs, ModelArgs, SeriesArgs, SimulateArgs, SpectrumArgs, VerifyArgs};
use crate::config::{resolve, Overrides};
use crate::failure::Failure;
use crate::manifest::Run;
use crate::model::{require_gmc, spec_from_args};
use crate::table::{num, read_column, write_csv, write_indexed, write_json};

/// Relative tolerance for `--check-identity`.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

const BOOTSTRAP_SALT: u64 = 0xb007;

fn model_overrides(o: &mut Overrides, model: &ModelArgs) -> Result<(), Failure> {
    o.set("spec", spec_from_args(model)?);
    Ok(())
}

fn resolve_with<T: Serialize + serde::de::DeserializeOwned>(
    defaults: &T,
    command: &str,
    common: &CommonArgs,
    o: &mut Overrides,
) -> Result<T, Failure> {
    o.set("seed", common.seed);
    resolve(defaults, command, common.config.as_deref(), o.take())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub spec: ModelSpec,
    pub n: usize,
    pub seed: u64,
    pub burn_in: usize,
    #[serde(default)]
    pub require_gmc: bool,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let defaults = SimulateConfig {
        spec: ModelSpec::iid(Innovation::standard_gaussian()),
        n: 1024,
        seed: 0,
        burn_in: DEFAULT_BURN_IN,
        require_gmc: false,
    };
    let mut o = Overrides::default();
    model_overrides(&mut o, &args.model)?;
    o.set("n", args.n).set("burn_in", args.burn_in).flag("require_gmc", args.require_gmc);
    let cfg = resolve_with(&defaults, "simulate", &args.common, &mut o)?;
    if cfg.n < 2 {
        return Err(Failure::usage(format!("n must be at least 2, got {}", cfg.n)));
    }
    cfg.spec.validate()?;
    if cfg.require_gmc {
        require_gmc(&cfg.spec)?;
    }
    let mut run = Run::start("simulate", &args.common.out)?;
    let x = simulate(&cfg.spec, cfg.n, cfg.burn_in, cfg.seed)?;
    let path = run.output("series.csv")?;
    write_indexed(&path, ["t", "x"], x.values(), 1)?;
    for w in cfg.spec.warnings() {
        eprintln!("warning: {w}");
    }
    run.note("warnings", cfg.spec.warnings());
    let m = run.finish(&cfg, Some(cfg.seed), "ok")?;
    println!("wrote {} observations to {} ({})", cfg.n, path.display(), m.display());
    Ok(())
}

/// Series source shared by spectrum and bootstrap: a file, or a simulated
/// path when `input` is absent.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub input: Option<PathBuf>,
    pub spec: ModelSpec,
    pub n: usize,
    pub seed: u64,
    pub burn_in: usize,
    #[serde(default)]
    pub subtract_mean: bool,
    #[serde(default)]
    pub require_gmc: bool,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            input: None,
            spec: ModelSpec::iid(Innovation::standard_gaussian()),
            n: 1024,
            seed: 0,
            burn_in: DEFAULT_BURN_IN,
            subtract_mean: false,
            require_gmc: false,
        }
    }
}

/// Adds a `series` table holding the series flags to `o`.
fn with_series(mut o: Overrides, s: &SeriesArgs, seed: Option<u64>) -> Result<Overrides, Failure> {
    if s.input.is_some() && s.model.model.is_some() {
        return Err(Failure::usage("give either --input or --model, not both"));
    }
    let mut inner = Overrides::default();
    model_overrides(&mut inner, &s.model)?;
    inner
        .set("input", s.input.clone())
        .set("n", s.n)
        .set("burn_in", s.burn_in)
        .set("seed", seed)
        .flag("subtract_mean", s.subtract_mean)
        .flag("require_gmc", s.require_gmc);
    let series = inner.take();
    if !series.is_empty() {
        o.0.insert("series".into(), serde_json::Value::Object(series));
    }
    Ok(o)
}

fn load_series(cfg: &SeriesConfig, run: &mut Run) -> Result<TimeSeries<f64>, Failure> {
    let x = match &cfg.input {
        Some(path) => {
            run.input(path)?;
            let v = read_column(path)?;
            TimeSeries::new(v).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
        }
        None => {
            cfg.spec.validate()?;
            if cfg.require_gmc {
                require_gmc(&cfg.spec)?;
            }
            if cfg.n < 2 {
                return Err(Failure::usage(format!("n must be at least 2, got {}", cfg.n)));
            }
            simulate(&cfg.spec, cfg.n, cfg.burn_in, cfg.seed)?
        }
    };
    Ok(if cfg.subtract_mean { x.demeaned() } else { x })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub series: SeriesConfig,
    pub window: Window,
    /// Truncation lag; `ceil(n^(1/3))` when absent.
    pub bn: Option<usize>,
    pub grid: usize,
    #[serde(default)]
    pub periodogram: bool,
    #[serde(default)]
    pub check_identity: bool,
}

fn default_bn(n: usize) -> usize {
    ((n as f64).cbrt().ceil() as usize).clamp(1, n - 1)
}

/// Largest relative gap between the lag-window and periodogram routes on the
/// `2n` grid, where the two agree exactly.
pub fn identity_gap(x: &TimeSeries<f64>, window: Window, bn: usize, lambdas: &[f64]) -> Result<f64, Failure> {
    let direct = lag_window_estimate(x, window, bn, lambdas)?;
    let p = oversampled_periodogram(x);
    let mut worst: f64 = 0.0;
    for (&lambda, &a) in lambdas.iter().zip(&direct.values) {
        let b = estimate_from_periodogram(&p, window, bn, lambda)?;
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((a - b).abs() / scale);
    }
    Ok(worst)
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<(), Failure> {
    let defaults = SpectrumConfig {
        series: SeriesConfig::default(),
        window: Window::Parzen,
        bn: None,
        grid: DEFAULT_GRID_POINTS,
        periodogram: false,
        check_identity: false,
    };
    let mut o = Overrides::default();
    o.set("window", args.window)
        .set("bn", args.bn)
        .set("grid", args.grid)
        .flag("periodogram", args.periodogram)
        .flag("check_identity", args.check_identity);
    let mut o = with_series(o, &args.series, args.common.seed)?;
    let cfg: SpectrumConfig = resolve(&defaults, "spectrum", args.common.config.as_deref(), o.take())?;
    if cfg.grid < 2 {
        return Err(Failure::usage("--grid needs at least two points"));
    }
    let mut run = Run::start("spectrum", &args.common.out)?;
    let x = load_series(&cfg.series, &mut run)?;
    let n = x.len();
    let bn = cfg.bn.unwrap_or_else(|| default_bn(n));
    let grid = frequency_grid(cfg.grid);
    let est = lag_window_estimate(&x, cfg.window, bn, &grid)?;
    let path = run.output("spectrum.csv")?;
    write_csv(&path, &["lambda", "f_n"], grid.iter().zip(&est.values).map(|(l, f)| vec![num(*l), num(*f)]))?;
    if cfg.periodogram {
        let p = periodogram(&x);
        let rows = p.ordinates().iter().enumerate().map(|(j, &i)| vec![num(TAU * j as f64 / n as f64), num(i)]);
        write_csv(&run.output("periodogram.csv")?, &["omega", "I"], rows)?;
    }
    run.note("n", n);
    run.note("bn", bn);
    let mut status = "ok";
    let mut failure = None;
    if cfg.check_identity {
        let gap = identity_gap(&x, cfg.window, bn, &grid)?;
        run.note("identity_max_relative_error", gap);
        println!("identity check: max relative gap {gap:.3e} (tolerance {IDENTITY_TOLERANCE:.0e})");
        if !(gap <= IDENTITY_TOLERANCE) {
            status = "fail";
            failure = Some(Failure::Verification(format!(
                "lag-window and periodogram routes differ by {gap:.3e} > {IDENTITY_TOLERANCE:.0e}"
            )));
        } else {
            status = "pass";
        }
    }
    let seed = cfg.series.input.is_none().then_some(cfg.series.seed);
    let m = run.finish(&cfg, seed, status)?;
    println!("wrote {} grid points (B_n = {bn}) to {} ({})", grid.len(), path.display(), m.display());
    failure.map_or(Ok(()), Err)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapRunConfig {
    pub series: SeriesConfig,
    pub window: Window,
    /// Defaults to `round(n^0.2)`.
    pub bn: Option<usize>,
    /// Defaults to `round(n^0.15)`, kept below `bn`.
    pub bn_pilot: Option<usize>,
    pub lambda: f64,
    pub variant: Variant,
    pub n_boot: usize,
    pub seed: u64,
    /// Sample to compare against with the Mallows distance.
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
struct BootstrapSummary {
    n: usize,
    bn: usize,
    bn_pilot: usize,
    lambda: f64,
    window: Window,
    variant: Variant,
    n_boot: usize,
    estimate: f64,
    pilot: f64,
    mean: f64,
    variance: f64,
    /// `sigma^2(lambda)` evaluated at the pilot.
    asymptotic_variance: f64,
    quantiles: BTreeMap<String, f64>,
    residuals: ResidualDiagnostics,
    d2_reference: Option<f64>,
}

const QUANTILES: [f64; 7] = [0.025, 0.05, 0.25, 0.5, 0.75, 0.95, 0.975];

pub fn cmd_bootstrap(args: &BootstrapArgs) -> Result<(), Failure> {
    let defaults = BootstrapRunConfig {
        series: SeriesConfig::default(),
        window: Window::Parzen,
        bn: None,
        bn_pilot: None,
        lambda: PI / 2.0,
        variant: Variant::Residual,
        n_boot: 400,
        seed: 0,
        reference: None,
    };
    let mut o = Overrides::default();
    o.set("window", args.window)
        .set("bn", args.bn)
        .set("bn_pilot", args.bn_pilot)
        .set("lambda", args.lambda)
        .set("variant", args.variant)
        .set("n_boot", args.n_boot)
        .set("reference", args.reference.clone())
        .set("seed", args.common.seed);
    // one seed drives both the simulated series and the resampling
    let mut o = with_series(o, &args.series, args.common.seed)?;
    let cfg: BootstrapRunConfig = resolve(&defaults, "bootstrap", args.common.config.as_deref(), o.take())?;
    if !(0.0..=PI).contains(&cfg.lambda) {
        return Err(Failure::usage(format!("--lambda must lie in [0, pi], got {}", cfg.lambda)));
    }
    let mut run = Run::start("bootstrap", &args.common.out)?;
    let x = load_series(&cfg.series, &mut run)?;
    let n = x.len();
    let (bn, bn_pilot) = match (cfg.bn, cfg.bn_pilot) {
        (Some(b), Some(p)) => (b, p),
        (b, p) => {
            let (db, dp) = default_bandwidths(n)?;
            let b = b.unwrap_or(db);
            (b, p.unwrap_or_else(|| dp.min(b.saturating_sub(1)).max(1)))
        }
    };
    let boot_cfg = BootstrapConfig {
        window: cfg.window,
        bn,
        bn_pilot,
        variant: cfg.variant,
        n_boot: cfg.n_boot,
        // keep resampling streams apart from the simulation stream
        seed: derive_seed(cfg.seed, BOOTSTRAP_SALT),
    };
    let dist = bootstrap_distribution(&x, &boot_cfg, cfg.lambda)?;
    let samples = dist.samples_f64();
    let path = run.output("bootstrap.csv")?;
    write_indexed(&path, ["replicate", "g_star"], &samples, 1)?;
    let d2_reference = match &cfg.reference {
        Some(p) => {
            run.input(p)?;
            Some(mallows_d2(&samples, &read_column(p)?)?)
        }
        None => None,
    };
    let summary = BootstrapSummary {
        n,
        bn,
        bn_pilot,
        lambda: cfg.lambda,
        window: cfg.window,
        variant: cfg.variant,
        n_boot: cfg.n_boot,
        estimate: dist.estimate_at_lambda,
        pilot: dist.pilot_at_lambda,
        mean: stats::mean(&samples),
        variance: stats::variance(&samples),
        asymptotic_variance: asymptotic_variance(dist.pilot_at_lambda, cfg.lambda, cfg.window),
        quantiles: QUANTILES
            .iter()
            .map(|&q| (format!("{q}"), stats::quantile(&samples, q)))
            .collect(),
        residuals: dist.diagnostics,
        d2_reference,
    };
    write_json(&run.output("summary.json")?, &summary)?;
    run.note("variant", cfg.variant);
    let m = run.finish(&cfg, Some(cfg.seed), "ok")?;
    println!(
        "{} {} bootstrap replicates at lambda = {} (B_n = {bn}, pilot {bn_pilot}); variance {:.6} vs asymptotic {:.6} ({})",
        cfg.n_boot,
        cfg.variant,
        cfg.lambda,
        summary.variance,
        summary.asymptotic_variance,
        m.display()
    );
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub spec: ModelSpec,
    pub alpha: f64,
    pub max_lag: usize,
    pub reps: usize,
    pub seed: u64,
}

pub fn cmd_gmc_decay(args: &GmcDecayArgs) -> Result<(), Failure> {
    let defaults = DecayConfig {
        spec: ModelSpec::ar(vec![0.5], Innovation::standard_gaussian()),
        alpha: 2.0,
        max_lag: 20,
        reps: 2000,
        seed: 0,
    };
    let mut o = Overrides::default();
    model_overrides(&mut o, &args.model)?;
    o.set("alpha", args.alpha).set("max_lag", args.max_lag).set("reps", args.reps);
    let cfg = resolve_with(&defaults, "gmc decay", &args.common, &mut o)?;
    if !(cfg.alpha > 0.0) {
        return Err(Failure::usage(format!("alpha must be positive, got {}", cfg.alpha)));
    }
    if cfg.max_lag < 1 {
        return Err(Failure::usage("max_lag must be at least 1"));
    }
    let mut run = Run::start("gmc decay", &args.common.out)?;
    let lags: Vec<usize> = (1..=cfg.max_lag).collect();
    let fit = estimate_decay(&cfg.spec, cfg.alpha, &lags, cfg.reps, cfg.seed)?;
    let rows = fit
        .lags
        .iter()
        .zip(&fit.moments)
        .zip(&fit.std_errors)
        .map(|((l, m), s)| vec![l.to_string(), num(*m), num(*s)]);
    write_csv(&run.output("decay.csv")?, &["lag", "moment", "stderr"], rows)?;
    write_json(&run.output("fit.json")?, &fit)?;
    let m = run.finish(&cfg, Some(cfg.seed), "ok")?;
    println!("rho_hat = {:.6}, C_hat = {:.6}, r2 = {:.4} ({})", fit.rho_hat, fit.c_hat, fit.r2, m.display());
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GarchConditionConfig {
    pub spec: ModelSpec,
    pub m: usize,
    /// Monte Carlo draws; analytic when absent.
    pub monte_carlo_reps: Option<usize>,
    pub seed: u64,
}

pub fn cmd_garch_condition(args: &GarchConditionArgs) -> Result<(), Failure> {
    let defaults = GarchConditionConfig {
        spec: ModelSpec::garch(0.1, vec![0.1], vec![0.8], Innovation::standard_gaussian()),
        m: 1,
        monte_carlo_reps: None,
        seed: 0,
    };
    let mut o = Overrides::default();
    model_overrides(&mut o, &args.model)?;
    o.set("m", args.m).set("monte_carlo_reps", args.reps);
    let cfg = resolve_with(&defaults, "gmc garch-condition", &args.common, &mut o)?;
    let mode = match cfg.monte_carlo_reps {
        Some(reps) => MomentMode::MonteCarlo { reps, seed: cfg.seed },
        None => MomentMode::Analytic,
    };
    let mut run = Run::start("gmc garch-condition", &args.common.out)?;
    let report = garch_moment_matrix(&cfg.spec, cfg.m, mode)?;
    write_json(&run.output("condition.json")?, &report)?;
    let m = run.finish(&cfg, cfg.monte_carlo_reps.map(|_| cfg.seed), "ok")?;
    println!(
        "m = {}: spectral_radius = {:.12}, delta = {:.12} ({})",
        cfg.m,
        report.spectral_radius,
        report.delta,
        m.display()
    );
    if report.verdicts_disagree {
        eprintln!("warning: the spectral radius and norm verdicts disagree");
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionConfig {
    pub spec: ModelSpec,
    pub alpha: f64,
}

pub fn cmd_contraction(args: &ContractionArgs) -> Result<(), Failure> {
    let defaults = ContractionConfig {
        spec: ModelSpec::expar(0.5, 0.3, 1.0, Innovation::standard_gaussian()),
        alpha: 1.0,
    };
    let mut o = Overrides::default();
    model_overrides(&mut o, &args.model)?;
    o.set("alpha", args.alpha);
    if args.common.seed.is_some() {
        return Err(Failure::usage("gmc contraction takes no --seed"));
    }
    let cfg: ContractionConfig = resolve(&defaults, "gmc contraction", args.common.config.as_deref(), o.take())?;
    let mut run = Run::start("gmc contraction", &args.common.out)?;
    let verdict = check_contraction(&cfg.spec, cfg.alpha)?;
    write_json(&run.output("contraction.json")?, &verdict)?;
    let m = run.finish(&cfg, None, if verdict.report.satisfied { "pass" } else { "fail" })?;
    println!(
        "coefficient sum {:.6} at alpha = {}: {} ({})",
        verdict.report.total,
        cfg.alpha,
        if verdict.report.satisfied { "contracting" } else { "not contracting" },
        m.display()
    );
    Ok(())
}

fn file_stem(key: &str) -> String {
    key.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let defaults = ExperimentConfig::preset(args.kind);
    if let Some(path) = &args.common.config {
        let layer = crate::config::load_layer(path, "verify")?;
        if let Some(k) = layer.get("kind").and_then(|k| k.as_str()) {
            if k != args.kind.name() {
                return Err(Failure::usage(format!(
                    "{} configures `{k}`, but `{}` was requested",
                    path.display(),
                    args.kind
                )));
            }
        }
    }
    let mut o = Overrides::default();
    model_overrides(&mut o, &args.model)?;
    o.list("n", &args.n)
        .set("reps", args.reps)
        .set("burn_in", args.burn_in)
        .set("window", args.window)
        .set("bandwidth", args.bn.map(|bn| BandwidthRule::Fixed { bn }))
        .set("pilot_bandwidth", args.bn_pilot.map(|bn| BandwidthRule::Fixed { bn }))
        .list("lambdas", &args.lambda)
        .set("grid_points", args.grid)
        .set("variant", args.variant)
        .set("n_boot", args.n_boot)
        .flag("subtract_mean", args.subtract_mean);
    let cfg = resolve_with(&defaults, "verify", &args.common, &mut o)?;
    let mut run = Run::start("verify", &args.common.out)?;
    let report = run_experiment(&cfg)?;
    write_json(&run.output("report.json")?, &report)?;
    for (key, values) in &report.samples {
        write_indexed(&run.output(&format!("samples/{}.csv", file_stem(key)))?, ["replicate", "value"], values, 1)?;
    }
    for (key, table) in &report.tables {
        let header: Vec<&str> = table.columns.iter().map(String::as_str).collect();
        let rows = table.rows.iter().map(|r| r.iter().map(|v| num(*v)).collect());
        write_csv(&run.output(&format!("tables/{}.csv", file_stem(key)))?, &header, rows)?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for c in &report.checks {
        let rel = match c.relation {
            nls_core::experiments::Relation::Below => "<",
            nls_core::experiments::Relation::AtLeast => ">=",
        };
        println!(
            "{} {}: {:.6} {rel} {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    let status = if report.pass { "pass" } else { "fail" };
    let m = run.finish(&cfg, Some(cfg.seed), status)?;
    println!("{} {status} ({})", cfg.kind, m.display());
    if report.pass {
        Ok(())
    } else {
        let failed: Vec<&str> = report.failed_checks().map(|c| c.name.as_str()).collect();
        Err(Failure::Verification(format!("{}: {}", cfg.kind, failed.join(", "))))
    }
}
