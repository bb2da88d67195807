//! `symcov`: aggregate, summarize, simulate and fit interval-valued data.
//!
//! Exit codes: 0 success, 2 bad input, 3 data too poor for the requested
//! statistics.

mod commands;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use symcov_core::{CovKind, Family};

#[derive(Parser)]
#[command(name = "symcov", version, about = "Symbolic covariance and correlation for interval-valued data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Collapse micro-data into one interval per group and variable.
    Aggregate(AggregateArgs),
    /// Mean vector, covariance and correlation matrices of macro-data.
    Stats(StatsArgs),
    /// Draw macro-data (and optionally micro-data) from population parameters.
    Simulate(SimulateArgs),
    /// Recover weights from micro-data and rank candidate weight models.
    Fit(FitArgs),
    /// Scatterplot matrix of intervals as SVG.
    Pairs(PairsArgs),
    /// Population covariance matrices from parameters.
    PopulationCov(PopulationCovArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A non-empty, ordered, duplicate-free list of covariance kinds.
#[derive(Clone, Debug)]
pub struct KList(pub Vec<CovKind>);

fn parse_k_list(s: &str) -> Result<KList, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(KList(CovKind::ALL.to_vec()));
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        let k: u8 = part
            .trim()
            .parse()
            .map_err(|_| format!("{part:?} is not a kind in 1..=8"))?;
        let kind = CovKind::from_index(k).map_err(|e| e.to_string())?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        return Err("empty kind list".into());
    }
    Ok(KList(out))
}

fn parse_kind(s: &str) -> Result<CovKind, String> {
    let k: u8 = s.parse().map_err(|_| format!("{s:?} is not a kind in 1..=8"))?;
    CovKind::from_index(k).map_err(|e| e.to_string())
}

fn parse_scenario(s: &str) -> Result<symcov_core::Scenario, String> {
    let n: u8 = s.parse().map_err(|_| format!("scenario must be 1 or 2, got {s:?}"))?;
    symcov_core::Scenario::try_from(n)
}

#[derive(Args)]
pub struct AggregateArgs {
    /// Micro CSV: `id,<var1>,...`, the id naming the group. `-` reads stdin.
    pub micro: PathBuf,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct StatsArgs {
    /// Macro CSV: `id,<var>_min,<var>_max,...`. `-` reads stdin.
    pub input: PathBuf,
    /// Kinds to report: `all` or a comma list such as `1,3,7`.
    #[arg(long, short, default_value = "all", value_parser = parse_k_list)]
    pub k: KList,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Skip the correlation matrices.
    #[arg(long)]
    pub no_correlation: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Population parameters JSON.
    pub params: PathBuf,
    /// Number of objects.
    #[arg(long, short)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    /// Weight family for the micro-data.
    #[arg(long, default_value = "continuous-uniform")]
    pub model: Family,
    /// 1: independent weights per variable, 2: one shared weight per point.
    #[arg(long, default_value = "1", value_parser = parse_scenario)]
    pub scenario: symcov_core::Scenario,
    /// Use the weight model of this covariance kind instead of --model/--scenario.
    #[arg(long, short, value_parser = parse_kind, conflicts_with_all = ["model", "scenario"])]
    pub k: Option<CovKind>,
    #[arg(long, default_value_t = 10)]
    pub points_per_object: usize,
    /// Macro CSV destination; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also write micro-data here.
    #[arg(long)]
    pub micro_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FitArgs {
    /// Micro CSV.
    pub micro: PathBuf,
    /// Macro CSV; when omitted the micro-data are aggregated and
    /// boundary values excluded.
    #[arg(long = "macro")]
    pub macro_data: Option<PathBuf>,
    /// Drop micro values equal to their group's minimum or maximum.
    #[arg(long)]
    pub exclude_boundary: bool,
    #[arg(long)]
    pub seed: u64,
    /// Simulated null samples per test.
    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,
    /// Candidate weight families, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "continuous-uniform,triangular,truncated-normal"
    )]
    pub candidates: Vec<Family>,
    /// Report destination; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// QQ bands of the recommended model on the pooled weights.
    #[arg(long)]
    pub qq_out: Option<PathBuf>,
    /// Recovered weights, with empty cells for missing values.
    #[arg(long)]
    pub weights_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PairsArgs {
    /// Macro CSV.
    pub input: PathBuf,
    /// Correlation kinds printed in the upper panels.
    #[arg(long, short, default_value = "1,2,3", value_parser = parse_k_list)]
    pub k: KList,
    #[arg(long, default_value_t = 800)]
    pub width: u32,
    #[arg(long, default_value_t = 800)]
    pub height: u32,
    /// CSV with an `id` column and categorical columns, for --color-by.
    #[arg(long, requires = "color_by")]
    pub labels: Option<PathBuf>,
    /// Column of --labels used to color rectangles.
    #[arg(long, requires = "labels")]
    pub color_by: Option<String>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PopulationCovArgs {
    /// Population parameters JSON.
    pub params: PathBuf,
    #[arg(long, short, default_value = "all", value_parser = parse_k_list)]
    pub k: KList,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Also report correlation matrices.
    #[arg(long)]
    pub correlation: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("SYMCOV_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .with_context(|| format!("SYMCOV_THREADS={value:?} is not a thread count"))?;
    if n == 0 {
        bail!("SYMCOV_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Aggregate(a) => commands::aggregate(&a),
        Command::Stats(a) => commands::stats(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Pairs(a) => commands::pairs(&a),
        Command::PopulationCov(a) => commands::population_cov(&a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let infeasible = err
        .chain()
        .filter_map(|e| e.downcast_ref::<symcov_core::Error>())
        .any(symcov_core::Error::is_infeasible);
    if infeasible {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_lists() {
        assert_eq!(parse_k_list("all").unwrap().0.len(), 8);
        let k = parse_k_list("3, 1,3").unwrap().0;
        assert_eq!(k.iter().map(|k| k.index()).collect::<Vec<_>>(), vec![3, 1]);
        assert!(parse_k_list("0").is_err());
        assert!(parse_k_list("9").is_err());
        assert!(parse_k_list("x").is_err());
        assert!(parse_k_list("").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn infeasible_errors_exit_three() {
        let e = anyhow::Error::new(symcov_core::Error::NoUsableWeights).context("fitting");
        assert_eq!(exit_code(&e), 3);
        let e = anyhow::Error::new(symcov_core::Error::ZeroVariance("x".into()));
        assert_eq!(exit_code(&e), 2);
        assert_eq!(exit_code(&anyhow::anyhow!("plain")), 2);
    }
}
