use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nls_core::bootstrap::Variant;
use nls_core::experiments::ExperimentKind;
use nls_core::spectral::Window;

#[derive(Debug, Parser)]
#[command(name = "nls", version, about = "Spectral analysis and bootstrap for nonlinear time series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a model and write `t,x` CSV.
    Simulate(SimulateArgs),
    /// Lag-window spectral density estimate of a series file or a simulated path.
    Spectrum(SpectrumArgs),
    /// Frequency-domain residual bootstrap of the spectral estimate at one frequency.
    Bootstrap(BootstrapArgs),
    /// Moment-contraction diagnostics.
    Gmc(GmcArgs),
    /// Run a Monte Carlo verification experiment; exit 3 if it fails.
    Verify(VerifyArgs),
}

fn parse_len(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < 2 {
        return Err(format!("sample size must be at least 2, got {n}"));
    }
    Ok(n)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("must be positive, got {v}"));
    }
    Ok(v)
}

fn parse_kind(s: &str) -> Result<ExperimentKind, String> {
    s.parse().map_err(|e: nls_core::Error| e.to_string())
}

fn parse_window(s: &str) -> Result<Window, String> {
    s.parse().map_err(|e: nls_core::Error| e.to_string())
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: nls_core::Error| e.to_string())
}

/// Options every command accepts.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML config file, or a manifest JSON from an earlier run to replay.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Random seed; falls back to the config file, then NLS_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Iid,
    Ar,
    Arma,
    Expar,
    ArArch,
    Garch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InnovationKind {
    Gaussian,
    Rademacher,
    StudentT,
    Uniform,
}

/// Model given by flags. Bilinear, signed-volatility and random coefficient
/// models need a `[spec]` table in a config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub model: Option<Family>,
    /// AR coefficients (ar, arma).
    #[arg(long, alias = "phi", value_delimiter = ',', allow_negative_numbers = true)]
    pub ar: Vec<f64>,
    /// MA coefficients (arma).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub ma: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta1: Option<f64>,
    /// EXPAR decay rate.
    #[arg(long)]
    pub a: Option<f64>,
    /// AR-ARCH parameters t1..t5.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub theta: Vec<f64>,
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// ARCH coefficients.
    #[arg(long, value_delimiter = ',')]
    pub arch: Vec<f64>,
    /// GARCH coefficients.
    #[arg(long, value_delimiter = ',')]
    pub garch: Vec<f64>,
    /// Power of the asymmetric power GARCH.
    #[arg(long)]
    pub power: Option<f64>,
    /// Asymmetry of the asymmetric power GARCH.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum)]
    pub innovation: Option<InnovationKind>,
    /// Gaussian innovation variance.
    #[arg(long)]
    pub variance: Option<f64>,
    /// Student t degrees of freedom.
    #[arg(long)]
    pub df: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_parser = parse_len)]
    pub n: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Refuse models that fail the contraction criterion.
    #[arg(long)]
    pub require_gmc: bool,
}

/// Where the series comes from: `--input` or a simulated model.
#[derive(Debug, Args)]
pub struct SeriesArgs {
    /// Series CSV (`t,x` or a single column).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_parser = parse_len)]
    pub n: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Remove the sample mean before estimation.
    #[arg(long)]
    pub subtract_mean: bool,
    #[arg(long)]
    pub require_gmc: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[arg(long, value_parser = parse_window)]
    pub window: Option<Window>,
    #[arg(long = "Bn")]
    pub bn: Option<usize>,
    /// Number of equispaced frequencies on [0, pi].
    #[arg(long)]
    pub grid: Option<usize>,
    /// Also write the Fourier-frequency periodogram.
    #[arg(long)]
    pub periodogram: bool,
    /// Cross-check the estimate against the periodogram route; exit 3 on mismatch.
    #[arg(long)]
    pub check_identity: bool,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[arg(long, value_parser = parse_window)]
    pub window: Option<Window>,
    #[arg(long = "Bn")]
    pub bn: Option<usize>,
    #[arg(long = "Bn-pilot")]
    pub bn_pilot: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub n_boot: Option<usize>,
    /// Reference sample (last CSV column) for a Mallows distance.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GmcArgs {
    #[command(subcommand)]
    pub action: GmcAction,
}

#[derive(Debug, Subcommand)]
pub enum GmcAction {
    /// Coupled-path estimate of the contraction rate.
    Decay(GmcDecayArgs),
    /// Kronecker moment condition for asymmetric power GARCH.
    GarchCondition(GarchConditionArgs),
    /// Closed-form contraction coefficients.
    Contraction(ContractionArgs),
}

#[derive(Debug, Args)]
pub struct GmcDecayArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_parser = parse_positive)]
    pub alpha: Option<f64>,
    /// Lags 1..=max-lag.
    #[arg(long)]
    pub max_lag: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GarchConditionArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub m: Option<usize>,
    /// Monte Carlo estimate from this many draws instead of the analytic mean.
    #[arg(long)]
    pub reps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ContractionArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_parser = parse_positive)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_parser = parse_kind)]
    pub kind: ExperimentKind,
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sample size(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long, value_parser = parse_window)]
    pub window: Option<Window>,
    /// Fixed truncation lag.
    #[arg(long = "Bn")]
    pub bn: Option<usize>,
    #[arg(long = "Bn-pilot")]
    pub bn_pilot: Option<usize>,
    /// Frequencies, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub n_boot: Option<usize>,
    #[arg(long)]
    pub subtract_mean: bool,
}
