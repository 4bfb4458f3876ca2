use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opineval_core::{Axis, CurveMode, Format};

#[derive(Debug, Parser)]
#[command(name = "opineval", version, about = "Review helpfulness analysis and opinion-mixture toolkit")]
pub struct Cli {
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Suppress progress messages on stderr
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a corpus, optionally filter and deduplicate it, and write it back out
    Ingest(IngestArgs),
    /// Write per-corpus summary rows as a JSON array
    Summarize(SummarizeArgs),
    /// Write a deviation-binned helpfulness curve as CSV
    Stats(StatsArgs),
    /// Find near-duplicate review pairs across products
    Dedup(DedupArgs),
    /// Mantel-Haenszel verdict grid over near-duplicate pairs
    Mh(MhArgs),
    /// Opinion mixture model tools
    #[command(subcommand)]
    Model(ModelCommand),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input format
    #[arg(long, value_parser = parse_format, default_value = "jsonl")]
    pub format: Format,
    /// Drop reviews with fewer total votes than this
    #[arg(long, default_value_t = 10)]
    pub min_votes: u64,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse::<Format>().map_err(|e| e.to_string())
}

fn parse_mode(s: &str) -> Result<CurveMode, String> {
    s.parse::<CurveMode>().map_err(|e| e.to_string())
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse::<Axis>().map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Collapse byte-identical copies shared across product versions
    #[arg(long)]
    pub dedup_mechanical: bool,
    /// Where to write the cleaned corpus (validation only when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format (defaults to the input format)
    #[arg(long, value_parser = parse_format)]
    pub out_format: Option<Format>,
    pub path: PathBuf,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// One corpus per file; the file stem is its label
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_parser = parse_mode, default_value = "signed")]
    pub mode: CurveMode,
    /// Restrict to products whose star variance rounds to this bin
    #[arg(long, allow_negative_numbers = true)]
    pub variance_bin: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    pub path: PathBuf,
}

#[derive(Debug, Args)]
pub struct DedupArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0.70)]
    pub threshold: f64,
    /// Skip fingerprints shared by more than this many reviews
    #[arg(long)]
    pub max_bucket: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    pub path: PathBuf,
}

#[derive(Debug, Args)]
pub struct MhArgs {
    /// Pairs CSV written by `dedup`
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, value_parser = parse_axis, default_value = "abs")]
    pub axis: Axis,
    /// Text grid
    #[arg(long)]
    pub out: PathBuf,
    /// JSON sidecar (defaults to the text path with a .json extension)
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Permutation-test draws per cell (0 disables)
    #[arg(long, default_value_t = 0)]
    pub permutations: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelFamily {
    Gaussian,
    Triangular,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value_t = KernelFamily::Gaussian)]
    pub kernel: KernelFamily,
    /// Standard deviation (gaussian) or half-width (triangular)
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

#[derive(Debug, Subcommand)]
pub enum ModelCommand {
    /// Numerically check the regime and argmax-shift statements
    Verify(VerifyArgs),
    /// Simulate tolerance evaluators voting on reviews
    Simulate(SimulateArgs),
    /// Tabulate f, g and h for plotting
    Density(DensityArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub alpha_list: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value_t = 1e-4)]
    pub margin: f64,
    /// Also write the report here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 3.5, allow_negative_numbers = true)]
    pub mu: f64,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Evaluator agreement window
    #[arg(long, default_value_t = 0.55)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub evaluators: u64,
    /// Synthetic products, each carrying one review per score
    #[arg(long, default_value_t = 200)]
    pub products: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub scores: Vec<f64>,
    #[arg(long, value_parser = parse_format, default_value = "jsonl")]
    pub format: Format,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long, default_value_t = 0.7)]
    pub p: f64,
    #[arg(long, default_value_t = 3.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Grid start (defaults to mean_g - 5 scale)
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    /// Grid end (defaults to mean_f + 5 scale)
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    /// Grid step (defaults to scale / 50)
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}
