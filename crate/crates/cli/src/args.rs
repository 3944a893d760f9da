use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "srrt",
    version,
    about = "Search-region regulated single-object tracking"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track every sequence of a dataset and write trajectory files.
    Track(TrackArgs),
    /// Score trajectory files against ground truth.
    Eval(EvalArgs),
    /// Minimum search region distribution of a dataset's ground truth.
    Stats(StatsArgs),
    /// Export a training set for learned regulators.
    Sample(SampleArgs),
    /// Compare per-frame latency across search region settings.
    Bench(BenchArgs),
    /// Render synthetic sequences from motion spec files.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: logical cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrackerFlags {
    /// oracle, classical or file:<path>
    #[arg(long)]
    pub regulator: Option<String>,
    /// ncc or oracle
    #[arg(long)]
    pub tracker: Option<String>,
    /// Allowed radius factors, e.g. 2,4
    #[arg(long, value_delimiter = ',')]
    pub categories: Option<Vec<u32>>,
    /// Locking frames before the dynamic reference is replaced.
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Window-penalty weight.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Center noise of the oracle tracker, pixels.
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub tracker: TrackerFlags,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Directory receiving `<sequence>.txt` and its metadata.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Run the fixed-region baseline with this factor instead.
    #[arg(long)]
    pub gamma: Option<u32>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Directory of trajectory files written by `track`.
    #[arg(long)]
    pub results: PathBuf,
    /// Directory for `report.json` and `success.csv` (default: report on stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Report file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Number of samples; targets cycle through the four categories.
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub tracker: TrackerFlags,
    /// Dataset to time; a synthetic low-motion sequence when absent.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// CSV file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Frames of the synthetic sequence.
    #[arg(long, default_value_t = 300)]
    pub frames: usize,
    #[arg(long, default_value_t = 10)]
    pub warmup: usize,
    /// Also time the regulated loop.
    #[arg(long)]
    pub regulated: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    /// JSON motion spec, or an array of them.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}
