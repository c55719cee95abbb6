use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "svtail",
    version,
    about = "Tail bounds for the largest singular value of sub-Gaussian random matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate bounds on a t-grid (no simulation).
    Bound(BoundArgs),
    /// Estimate the empirical tail P(‖B‖ > t) by Monte Carlo.
    Simulate(SimArgs),
    /// Simulate and check that every requested bound dominates the empirical tail.
    Verify(VerifyArgs),
    /// Gaussian Toeplitz experiment.
    Toeplitz(ToeplitzArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    /// Rows of an iid matrix.
    #[arg(long)]
    pub m: Option<usize>,
    /// Columns of an iid matrix.
    #[arg(long)]
    pub n: Option<usize>,
    /// Dimension of a Gaussian Toeplitz matrix (instead of --m/--n).
    #[arg(long)]
    pub d: Option<usize>,
    /// Entry distribution: gaussian, rademacher or uniform:<a>.
    #[arg(long, default_value = "gaussian")]
    pub model: String,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Grid as start:stop:step (endpoints inclusive) or a comma list.
    #[arg(long = "t-grid")]
    pub t_grid: Option<String>,
    /// A single t value.
    #[arg(long, conflicts_with = "t_grid")]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Number of Monte Carlo trials (default 100000, or 10000 when a dimension is ≥ 64).
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed.
    #[arg(long, env = "SVTAIL_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Confidence level of the Clopper–Pearson intervals.
    #[arg(long, default_value_t = 0.99)]
    pub confidence: f64,
    /// Worker-thread hint; does not affect results.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Comma-separated bound tags.
    #[arg(long)]
    pub bounds: Option<String>,
    /// Print the crossover t* between the net and entrywise bounds.
    #[arg(long)]
    pub crossover: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Comma-separated bound tags to attach as extra columns.
    #[arg(long)]
    pub bounds: Option<String>,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Comma-separated bound tags to verify.
    #[arg(long)]
    pub bounds: Option<String>,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Write the verification report as JSON to this path.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ToeplitzArgs {
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Print the variance parameter of the Toeplitz series and exit.
    #[arg(long)]
    pub show_rho: bool,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Write the verification report as JSON to this path.
    #[arg(long)]
    pub report: Option<PathBuf>,
}
