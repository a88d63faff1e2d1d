use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "permkit", version, about = "Approximate k-NN search with permutation-based indexes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an index over a data set and write a snapshot plus build statistics.
    #[command(args_override_self = true)]
    Build(BuildArgs),
    /// Answer k-NN queries with a snapshot.
    #[command(args_override_self = true)]
    Search(SearchArgs),
    /// Run the benchmark protocol for one or more methods.
    #[command(args_override_self = true)]
    Bench(BenchArgs),
    /// Search query-time parameters for a recall band.
    #[command(args_override_self = true)]
    Tune(TuneArgs),
    /// Projection scatter, recall-vs-fraction curve or space diagnostics.
    #[command(args_override_self = true)]
    Analyze(AnalyzeArgs),
    /// Write a synthetic data set.
    #[command(args_override_self = true)]
    Generate(GenerateArgs),
    /// Inspect a snapshot and optionally verify it against its data.
    #[command(args_override_self = true)]
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Flat TOML file of option defaults; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// l2, cosine-sparse, kl-div, js-div, norm-levenshtein or sqfd.
    #[arg(long, default_value = "l2")]
    pub space: String,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// dense-text, dense-binary, sparse-text, string-lines or signature-text.
    #[arg(long)]
    pub format: Option<String>,
    /// Argument order for asymmetric distances: left (data point first) or right.
    #[arg(long, default_value = "left")]
    pub query_mode: String,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep histograms as read instead of flooring and renormalizing.
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MethodArgs {
    /// brute-force, permfilter, mifile, napp, vptree or swgraph (comma-separated for bench).
    #[arg(long)]
    pub method: Option<String>,
    /// Number of pivots.
    #[arg(long)]
    pub m: Option<usize>,
    /// Closest pivots indexed per object (mifile, napp).
    #[arg(long = "mi")]
    pub m_i: Option<usize>,
    /// Closest pivots used per query (mifile).
    #[arg(long = "ms")]
    pub m_s: Option<usize>,
    /// Minimum shared pivots (napp).
    #[arg(long)]
    pub t: Option<usize>,
    /// Maximum position difference (mifile).
    #[arg(long = "D")]
    pub max_position_diff: Option<usize>,
    /// Candidate budget: a count (200), a fraction (0.02) or a percentage (2%).
    #[arg(long)]
    pub gamma: Option<String>,
    /// Permutation storage for permfilter: full or binary.
    #[arg(long)]
    pub mode: Option<String>,
    /// Binarization threshold (defaults to m/2).
    #[arg(long)]
    pub threshold: Option<usize>,
    /// spearman, footrule or hamming (permfilter).
    #[arg(long)]
    pub perm_distance: Option<String>,
    /// Accumulator metric for mifile: footrule or spearman.
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub chunk_size: Option<usize>,
    #[arg(long)]
    pub bucket_size: Option<usize>,
    #[arg(long)]
    pub alpha_left: Option<f64>,
    #[arg(long)]
    pub alpha_right: Option<f64>,
    #[arg(long)]
    pub beta: Option<u32>,
    /// Neighbors linked per inserted node (swgraph).
    #[arg(long)]
    pub nn: Option<usize>,
    /// Search restarts (swgraph).
    #[arg(long)]
    pub attempts: Option<usize>,
    /// Insertion restarts (swgraph).
    #[arg(long)]
    pub build_attempts: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TuneSampleArgs {
    /// Recall band LOW,HIGH.
    #[arg(long, default_value = "0.9,1.0")]
    pub band: String,
    /// Query file for tuning; by default queries are held out from the data.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Number of held-out tuning queries.
    #[arg(long, default_value_t = 100)]
    pub tune_queries: usize,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Snapshot path.
    #[arg(long)]
    pub output: PathBuf,
    /// Build statistics path (default: snapshot path + `.stats.json`).
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Tune query-time parameters on a sample before saving.
    #[arg(long)]
    pub tune: bool,
    #[command(flatten)]
    pub sample: TuneSampleArgs,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Query-time overrides; build parameters are taken from the snapshot.
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    /// Results JSON (default: standard output).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long, default_value_t = 1)]
    pub splits: usize,
    #[arg(long, default_value_t = 100)]
    pub queries_per_split: usize,
    /// Directory receiving `<name>.jsonl` and `<name>.csv`.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value = "bench")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub sample: TuneSampleArgs,
    /// Best-parameter JSON with the full trace (default: standard output).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// scatter, curve or space-diagnostics.
    #[arg(long)]
    pub what: String,
    /// Sampled pairs for the scatter.
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,
    /// Permutation distance shown in the scatter: l2, spearman or footrule.
    #[arg(long, default_value = "l2")]
    pub projection: String,
    /// Candidate fractions for the curve.
    #[arg(long, default_value = "0.001,0.002,0.005,0.01,0.02,0.05,0.1")]
    pub fractions: String,
    /// Held-out queries for the curve.
    #[arg(long, default_value_t = 100)]
    pub queries_per_split: usize,
    /// Sampled triples for space diagnostics.
    #[arg(long, default_value_t = 100_000)]
    pub triples: usize,
    /// CSV path (default: standard output); run metadata goes to `<output>.meta.json`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// gaussian-mixture, uniform, dirichlet, dna, sparse or signatures.
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long)]
    pub spread: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub nnz: Option<usize>,
    #[arg(long)]
    pub mean_length: Option<f64>,
    #[arg(long)]
    pub sd_length: Option<f64>,
    #[arg(long)]
    pub signature_clusters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub index: PathBuf,
    /// Data set to verify the snapshot against.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
    /// Defaults to the space recorded in the snapshot.
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long, default_value = "left")]
    pub query_mode: String,
    #[arg(long)]
    pub no_normalize: bool,
}
