use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kmmeans::simulate::{Mechanism, Separation};

#[derive(Debug, Parser)]
#[command(name = "kmmeans", version, about = "k-means clustering for data with missing values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a CSV file into K groups.
    Cluster(ClusterArgs),
    /// Fit a range of K and pick one with the jump statistic.
    SelectK(SelectKArgs),
    /// Simulate labeled Gaussian clusters and mask them.
    Simulate(SimulateArgs),
    /// Compare predicted labels with true ones (ARI and confusion matrix).
    Evaluate(EvaluateArgs),
    /// Run simulation replicates and write JSON-lines metrics.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CsvArgs {
    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Token marking a missing cell; empty cells are always missing.
    #[arg(long, default_value = "NA")]
    pub missing_token: String,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Input CSV of numeric columns.
    pub input: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
    /// The first line holds data, not column names.
    #[arg(long)]
    pub no_header: bool,
    /// Columns (names or 1-based indices) to log10-transform.
    #[arg(long, value_delimiter = ',')]
    pub log10: Vec<String>,
    /// Columns (names or 1-based indices) to transform by asinh(theta u) / theta.
    #[arg(long, value_delimiter = ',')]
    pub asinh: Vec<String>,
    /// Theta for --asinh.
    #[arg(long, default_value_t = 10.0)]
    pub theta: f64,
    /// Center and scale every column by its observed mean and sample SD, after
    /// the per-column transforms.
    #[arg(long)]
    pub center_scale: bool,
    /// Also write the transformed data here.
    #[arg(long)]
    pub transformed_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    /// Partial squared distance per shared feature.
    Scaled,
    /// Partial squared distance.
    Unscaled,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Restarts (default 100 K p for km; 5 for kpod).
    #[arg(long)]
    pub inits: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// k-means++ weighting of candidate rows.
    #[arg(long, value_enum, default_value_t = WeightingArg::Scaled)]
    pub weighting: WeightingArg,
    /// Run restarts on one thread.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Km,
    Kpod,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Assignments CSV (row_id, cluster); stdout when omitted.
    #[arg(long)]
    pub assignments: Option<PathBuf>,
    /// JSON summary of the fit.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Number of clusters.
    #[arg(short, long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Km)]
    pub method: MethodArg,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SelectKArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1)]
    pub k_min: usize,
    #[arg(long)]
    pub k_max: usize,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Upper bound on restarts per K.
    #[arg(long)]
    pub inits_cap: Option<usize>,
    /// Per-K table CSV (K, W_K, D_K, J_K); stdout when omitted.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Assignments CSV for the selected K.
    #[arg(long)]
    pub assignments: Option<PathBuf>,
    /// JSON summary for the selected K.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn parse_separation(s: &str) -> Result<Separation, String> {
    s.parse().map_err(|e: kmmeans::Error| e.to_string())
}

fn parse_mechanism(s: &str) -> Result<Mechanism, String> {
    s.parse().map_err(|e: kmmeans::Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    /// easy, medium, hard, or a minimum center distance in SD units.
    #[arg(long, default_value = "medium", value_parser = parse_separation)]
    pub separation: Separation,
    /// Within-cluster standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// MCAR, MAR, NMAR1 or NMAR2.
    #[arg(long, default_value = "MCAR", value_parser = parse_mechanism)]
    pub mechanism: Mechanism,
    /// Target fraction of missing cells.
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    /// Share of dimensions censored under MAR.
    #[arg(long, default_value_t = 0.4)]
    pub mar_dim_fraction: f64,
    /// Clusters (1-based) censored under NMAR1/NMAR2; ceil(K/2) random ones by default.
    #[arg(long, value_delimiter = ',')]
    pub affected: Vec<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for complete.csv, masked.csv, labels.csv and truth.json.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// True labels (last column of each row).
    #[arg(long)]
    pub truth: PathBuf,
    /// Predicted labels (last column of each row).
    #[arg(long)]
    pub predicted: PathBuf,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Label files have no header line. Without this flag a first line whose
    /// label is not an integer is taken as a header.
    #[arg(long)]
    pub no_header: bool,
    /// Also write the result as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, default_value_t = 50)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    /// km-means restarts (default 100 K p).
    #[arg(long)]
    pub km_inits: Option<usize>,
    /// Also run k-POD with this many restarts.
    #[arg(long)]
    pub kpod_inits: Option<usize>,
    /// Also estimate K over 1..=K_MAX.
    #[arg(long)]
    pub select_k_max: Option<usize>,
    /// Run replicates on one thread.
    #[arg(long)]
    pub serial: bool,
    /// JSON-lines output; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
