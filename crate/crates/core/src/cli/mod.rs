//! The `wifi-resp` command line.
//!
//! ```text
//! wifi-resp [--jobs N] synth --suite default --seed 7 --out data/
//! wifi-resp run --dataset data/ --method pca --out results/
//! wifi-resp run --csi rec.csi.csv --ref rec.ref.csv --method correlation
//! wifi-resp spectrogram results/a.waveform.csv results/a.reference.csv
//! wifi-resp report results/ --format text
//! ```
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::csi_data::Posture;
use crate::dsp::{FilterSpec, PhaseMode};
use crate::error::Error;
use crate::pipeline::PipelineConfig;
use crate::respiration::DetectionParams;
use crate::selection::Method;

pub use commands::{cmd_report, cmd_run, cmd_spectrogram, cmd_synth, record_id, RunOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wifi-resp", version, about = "Respiration from Wi-Fi CSI magnitude traces")]
pub struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic subject x posture dataset.
    Synth(SynthArgs),
    /// Extract, count and evaluate respiration for CSI records.
    Run(RunArgs),
    /// Short-time Fourier magnitudes of one or more series files.
    Spectrogram(SpectrogramArgs),
    /// Aggregate per-record report JSON files into tables.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutDir {
    /// Output directory.
    #[arg(long, env = "WIFI_RESP_OUT", default_value = "wifi-resp-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    Default,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "default")]
    pub suite: SuiteName,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of subjects, taken from the default profiles in order.
    #[arg(long, default_value_t = 5)]
    pub subjects: usize,
    #[arg(long, value_delimiter = ',', default_value = "supine,side,prone")]
    pub postures: Vec<Posture>,
    /// Seconds per record.
    #[arg(long, default_value_t = 300.0)]
    pub duration: f64,
    /// Per-subcarrier SNR, dB.
    #[arg(long, default_value_t = 20.0)]
    pub snr: f64,
    /// No noise, jitter or outliers.
    #[arg(long)]
    pub noiseless: bool,
    /// Store complex CSI instead of magnitudes.
    #[arg(long)]
    pub complex: bool,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Correlation,
    Pca,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Correlation => Method::Correlation,
            MethodArg::Pca => Method::Pca,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhaseArg {
    Zero,
    Causal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// CSI record files (.csv, or .ndjson/.jsonl).
    #[arg(long = "csi", num_args = 1..)]
    pub csi: Vec<PathBuf>,
    /// Reference traces, one per `--csi` file in the same order.
    #[arg(long = "ref", num_args = 1..)]
    pub refs: Vec<PathBuf>,
    /// Directory of `<id>.csi.csv` files with optional `<id>.ref.csv`.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Reference sampling rate when the file header lacks one, Hz.
    #[arg(long)]
    pub ref_rate: Option<f64>,
    #[arg(long, value_enum, default_value = "pca")]
    pub method: MethodArg,
    /// Epoch length, seconds.
    #[arg(long, default_value_t = 30.0)]
    pub epoch: f64,
    #[arg(long, default_value_t = 0.2)]
    pub bp_low: f64,
    #[arg(long, default_value_t = 0.4)]
    pub bp_high: f64,
    #[arg(long, default_value_t = 4)]
    pub bp_order: usize,
    #[arg(long, default_value_t = 1.0)]
    pub hampel_window: f64,
    #[arg(long, default_value_t = 1.7)]
    pub hampel_threshold: f64,
    #[arg(long, default_value_t = 1.5)]
    pub ma_window: f64,
    /// Resampling rate, Hz.
    #[arg(long, default_value_t = 60.0)]
    pub rate: f64,
    #[arg(long, value_enum, default_value = "zero")]
    pub phase: PhaseArg,
    /// Largest reference lag searched, seconds.
    #[arg(long, default_value_t = 10.0)]
    pub max_lag: f64,
    #[arg(long, default_value_t = 10.0)]
    pub correlation_window: f64,
    #[arg(long, default_value_t = 30.0)]
    pub pca_window: f64,
    #[arg(long, default_value_t = 10.0)]
    pub eval_window: f64,
    #[arg(long, default_value_t = 1.2)]
    pub min_separation: f64,
    #[arg(long, default_value_t = 0.2)]
    pub min_prominence: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json,text,csv")]
    pub format: Vec<ReportFormat>,
    /// Also write a spectrogram PNG per record.
    #[arg(long)]
    pub plot: bool,
    #[command(flatten)]
    pub out: OutDir,
}

impl RunArgs {
    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            filter: FilterSpec {
                hampel_window: self.hampel_window,
                hampel_threshold: self.hampel_threshold,
                target_rate: self.rate,
                ma_window: self.ma_window,
                bp_low: self.bp_low,
                bp_high: self.bp_high,
                bp_order: self.bp_order,
                phase_mode: match self.phase {
                    PhaseArg::Zero => PhaseMode::ZeroPhase,
                    PhaseArg::Causal => PhaseMode::Causal,
                },
            },
            method: self.method.into(),
            correlation_window: self.correlation_window,
            pca_window: self.pca_window,
            detection: DetectionParams {
                min_separation: self.min_separation,
                min_prominence: self.min_prominence,
            },
            epoch: self.epoch,
            max_lag: self.max_lag,
            eval_window: self.eval_window,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpectrogramArgs {
    /// Series files (`# series v1` or `# ref v1` headers); several inputs are
    /// drawn as stacked panels.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Seconds.
    #[arg(long, default_value_t = 30.0)]
    pub window: f64,
    #[arg(long, default_value_t = 0.5)]
    pub overlap: f64,
    /// Highest frequency drawn, Hz.
    #[arg(long, default_value_t = 1.0)]
    pub max_freq: f64,
    /// Pixels per cell.
    #[arg(long, default_value_t = 4)]
    pub scale: u32,
    #[arg(long)]
    pub no_png: bool,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Report JSON files, or directories searched for `*.report.json`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json,text,csv")]
    pub format: Vec<ReportFormat>,
    #[command(flatten)]
    pub out: OutDir,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failed(e) if e.is_data_error() => EXIT_DATA,
            CliError::Failed(_) => EXIT_INTERNAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Failed(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Failed(e)
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let work = move || match cli.command {
        Command::Synth(a) => cmd_synth(&a).map(|_| ()),
        Command::Run(a) => cmd_run(&a).map(|_| ()),
        Command::Spectrogram(a) => cmd_spectrogram(&a).map(|_| ()),
        Command::Report(a) => cmd_report(&a).map(|_| ()),
    };
    match cli.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Failed(Error::InvalidInput(e.to_string())))?
            .install(work),
        None => work(),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| execute(cli))) {
        Ok(Ok(())) => EXIT_OK,
        Ok(Err(e)) => {
            eprintln!("wifi-resp: {e}");
            e.exit_code()
        }
        Err(_) => EXIT_INTERNAL,
    }
}
