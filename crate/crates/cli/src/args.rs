use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use stein_gauge::{Backend, Direction, MetricKind, SuiteName, ZooKind};

/// Environment variable that replaces the default tail mass of specs that
/// do not set one.
pub const TAIL_MASS_ENV: &str = "STEIN_GAUGE_TAIL_MASS";

#[derive(Debug, Parser)]
#[command(name = "stein-gauge", version, about = "Discrete Stein operators, information distances and local Pinsker checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distances and information functionals between two densities.
    Dist(DistArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Matrix-rank total-variation chain, link by link.
    RankExperiment(RankArgs),
    /// Closed-form operator catalogue.
    Zoo {
        #[command(subcommand)]
        command: ZooCommand,
    },
    /// Solve the Stein equation for a test function.
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a flat CSV table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    /// Reference density spec (JSON).
    #[arg(long)]
    pub p: PathBuf,
    /// Compared density spec (JSON).
    #[arg(long)]
    pub q: PathBuf,
    /// Metrics, comma separated.
    #[arg(long = "metric", value_delimiter = ',', value_parser = parse_metric,
          default_value = "total_variation,kolmogorov,kullback_leibler")]
    pub metrics: Vec<MetricKind>,
    #[arg(long, value_parser = parse_backend, default_value = "rational")]
    pub backend: Backend,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = parse_suite)]
    pub suite: SuiteName,
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Random supports are [0, m] with m at most this.
    #[arg(long)]
    pub max_upper: Option<i64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<u64>>,
    /// Matrix sizes: `a..b`, `a..=b` or a comma-separated list.
    #[arg(long, value_parser = parse_sizes)]
    pub n: Option<SizeList>,
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Monte-Carlo draws per rank point.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, value_parser = parse_backend, default_value = "rational")]
    pub backend: Backend,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    pub theta: u64,
    #[arg(long, default_value_t = 8)]
    pub n_max: u32,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Subcommand)]
pub enum ZooCommand {
    /// Compare every closed form with the generic operator.
    Check(ZooArgs),
}

#[derive(Debug, Args)]
pub struct ZooArgs {
    /// Restrict to one operator.
    #[arg(long, value_parser = parse_zoo)]
    pub operator: Option<ZooKind>,
    #[arg(long, default_value_t = 32)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = parse_backend, default_value = "rational")]
    pub backend: Backend,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("test").required(true).args(["indicator", "table"]))]
pub struct SolveArgs {
    #[arg(long)]
    pub p: PathBuf,
    /// +1 (forward) or -1 (backward).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_direction)]
    pub eta: Direction,
    /// Test function 1_{z}.
    #[arg(long, allow_hyphen_values = true)]
    pub indicator: Option<i64>,
    /// Test function table: {"lower": a, "values": [...]}.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Second density for the class-membership verdicts.
    #[arg(long)]
    pub q: Option<PathBuf>,
    #[arg(long, value_parser = parse_backend, default_value = "rational")]
    pub backend: Backend,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeList(pub Vec<u32>);

fn parse_sizes(s: &str) -> Result<SizeList, String> {
    let bad = || format!("expected `a..b`, `a..=b` or a list, got `{s}`");
    let sizes = if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        // Both spellings are inclusive, as in `--n 1..6` for six sizes.
        (a..=b).collect()
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<Vec<u32>, _>>()?
    };
    if sizes.is_empty() {
        return Err(bad());
    }
    Ok(SizeList(sizes))
}

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse().map_err(|e: stein_gauge::Error| e.to_string())
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: stein_gauge::Error| e.to_string())
}

fn parse_suite(s: &str) -> Result<SuiteName, String> {
    s.parse().map_err(|e: stein_gauge::Error| e.to_string())
}

fn parse_zoo(s: &str) -> Result<ZooKind, String> {
    s.parse().map_err(|e: stein_gauge::Error| e.to_string())
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    match s {
        "+1" | "1" | "forward" => Ok(Direction::Forward),
        "-1" | "backward" => Ok(Direction::Backward),
        other => Err(format!("eta must be +1 or -1, got `{other}`")),
    }
}
