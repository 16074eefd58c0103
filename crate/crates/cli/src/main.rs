mod commands;
mod error;
mod formats;
mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ndcwt::spectra::{Detrend, FitMethod, LevelRange};
use ndcwt::Backend;
use serde::Serialize;

use crate::error::{CliError, EXIT_VALIDATION};

/// Non-decimated complex wavelet transforms, wavelet spectra and phase
/// descriptors.
#[derive(Debug, Parser)]
#[command(name = "ndcwt", version, propagate_version = true)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "NDCWT_THREADS")]
    pub threads: Option<usize>,

    /// Log more detail on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate fractional Brownian motion.
    Simulate(SimulateArgs),
    /// 1-D transform to JSON, or its inverse.
    Transform1d(Transform1dArgs),
    /// 2-D scale-mixing transform to the binary format, or its inverse.
    Transform2d(Transform2dArgs),
    /// Wavelet spectrum and Hurst exponent estimate.
    Spectra(AnalysisArgs),
    /// Per-level phase averages.
    Phase(PhaseArgs),
    /// Feature table for a manifest of inputs.
    Features(FeaturesArgs),
    /// Built-in identity, round-trip and oracle checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FilterArgs {
    /// Registered filter: haar or cdaub6.
    #[arg(long, default_value = "cdaub6")]
    pub wavelet: String,
    /// Custom lowpass taps, one `re im` pair per line; overrides --wavelet.
    #[arg(long)]
    pub filter_file: Option<PathBuf>,
    /// Matrix evaluation: auto, dense or circulant.
    #[arg(long, default_value = "auto")]
    pub backend: Backend,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// One-dimensional fBm path.
    #[arg(long, conflicts_with = "fbm2d", required_unless_present = "fbm2d")]
    pub fbm1d: bool,
    /// Two-dimensional isotropic fBm field.
    #[arg(long)]
    pub fbm2d: bool,
    /// Hurst exponent in (0, 1).
    #[arg(long)]
    pub hurst: f64,
    /// Path length (1-D).
    #[arg(long, required_if_eq("fbm1d", "true"))]
    pub length: Option<usize>,
    /// Field shape `ROWSxCOLS` (2-D).
    #[arg(long, value_parser = parse_shape, required_if_eq("fbm2d", "true"))]
    pub shape: Option<(usize, usize)>,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// ChaCha20 stream; replicate `r` of a batch uses stream `r`.
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// CSV, or PGM for 2-D fields (rescaled to 16 bits).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Transform1dArgs {
    /// Signal CSV; coefficient JSON with --inverse.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub filter: FilterArgs,
    /// Number of detail levels p.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Reconstruct a signal from coefficient JSON.
    #[arg(long)]
    pub inverse: bool,
    /// Coefficient JSON, or signal CSV with --inverse.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Transform2dArgs {
    /// Image CSV or PGM; binary coefficients with --inverse.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub filter: FilterArgs,
    /// Depth along columns (p1).
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Depth along rows (p2); defaults to --depth.
    #[arg(long)]
    pub depth2: Option<usize>,
    /// Reconstruct an image (CSV of real parts) from binary coefficients.
    #[arg(long)]
    pub inverse: bool,
    /// Binary coefficients, or image CSV with --inverse.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InputMode {
    Auto,
    #[value(name = "1d")]
    OneD,
    #[value(name = "2d")]
    TwoD,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalysisArgs {
    /// Signal CSV, image CSV or PGM.
    #[arg(long)]
    pub input: PathBuf,
    /// Treat the input as a signal (1d) or image (2d); auto uses its shape.
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: InputMode,
    #[command(flatten)]
    #[serde(flatten)]
    pub filter: FilterArgs,
    /// Number of detail levels p.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Row-axis depth for images; defaults to --depth.
    #[arg(long)]
    pub depth2: Option<usize>,
    /// Scale shift s of the (j, j + s) hierarchy for images.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub shift: i32,
    /// Levels used by the fit, `lo:hi` inclusive (default: all).
    #[arg(long)]
    pub levels: Option<LevelRange>,
    /// Regression: ols, wls or robust.
    #[arg(long, default_value = "ols")]
    pub fit: FitMethod,
    /// Signal preprocessing: none or endpoints (default endpoints for
    /// signals; images are never detrended).
    #[arg(long)]
    pub detrend: Option<Detrend>,
    /// Result JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the per-level values as CSV for plotting.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AverageArg {
    Arithmetic,
    Circular,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PhaseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub analysis: AnalysisArgs,
    /// Phase average: arithmetic (feature default) or circular.
    #[arg(long, value_enum, default_value = "arithmetic")]
    pub average: AverageArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Segmenting {
    pub window: usize,
    pub step: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FeaturesArgs {
    /// CSV with columns path, group, subject; paths relative to the manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub filter: FilterArgs,
    /// Number of detail levels p.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Levels used by the slope fit, `lo:hi` inclusive (default: all).
    #[arg(long)]
    pub levels: Option<LevelRange>,
    /// Regression: ols, wls or robust.
    #[arg(long, default_value = "ols")]
    pub fit: FitMethod,
    /// Signal preprocessing: none or endpoints.
    #[arg(long, default_value = "endpoints")]
    pub detrend: Detrend,
    /// Scale shift for image inputs.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub shift: i32,
    /// Cut signals into `WINDOW:STEP` segments (bare flag: 1024:100).
    #[arg(long, value_parser = parse_segment, num_args = 0..=1, default_missing_value = "1024:100")]
    pub segment: Option<Segmenting>,
    /// Remove nested subject effects from every feature column.
    #[arg(long)]
    pub adjust_subjects: bool,
    /// Write the nested ANOVA tables as JSON (needs --adjust-subjects).
    #[arg(long, requires = "adjust_subjects")]
    pub anova_out: Option<PathBuf>,
    /// Run the nearest-centroid split experiment by group and write JSON.
    #[arg(long)]
    pub classify_out: Option<PathBuf>,
    /// Random splits for --classify-out.
    #[arg(long, default_value_t = 100)]
    pub repeats: usize,
    /// Seed of the random splits.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Feature table CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Smaller instance sets.
    #[arg(long)]
    pub quick: bool,
    /// Time the reference 1-D and 2-D transforms.
    #[arg(long)]
    pub bench: bool,
    /// Seed of the random test inputs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn parse_shape(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X', ','])
        .ok_or_else(|| format!("expected ROWSxCOLS, got `{s}`"))?;
    let rows = a.trim().parse().map_err(|e| format!("rows `{a}`: {e}"))?;
    let cols = b.trim().parse().map_err(|e| format!("cols `{b}`: {e}"))?;
    Ok((rows, cols))
}

fn parse_segment(s: &str) -> Result<Segmenting, String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected WINDOW:STEP, got `{s}`"))?;
    let window: usize = a.trim().parse().map_err(|e| format!("window `{a}`: {e}"))?;
    let step: usize = b.trim().parse().map_err(|e| format!("step `{b}`: {e}"))?;
    if window == 0 || step == 0 {
        return Err("window and step must be positive".into());
    }
    Ok(Segmenting { window, step })
}

fn configure_threads(threads: Option<usize>) -> Result<usize, CliError> {
    if threads == Some(0) {
        return Err(CliError::validation("--threads", "must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::validation("--threads", e.to_string()))?;
        }
        Ok(rayon::current_num_threads())
    }
    #[cfg(not(feature = "parallel"))]
    {
        if threads.is_some_and(|n| n > 1) {
            log::warn!("built without the `parallel` feature; running on one thread");
        }
        Ok(1)
    }
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = configure_threads(cli.threads).and_then(|threads| commands::run(&cli.command, threads));
    if let Err(e) = result {
        eprintln!("error: {e}");
        let code = e.exit_code();
        debug_assert!(code == EXIT_VALIDATION || code == error::EXIT_IO);
        std::process::exit(code);
    }
}
