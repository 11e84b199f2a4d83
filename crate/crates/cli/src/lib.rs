//! Command-line front end: aggregation, volume estimation, dispatch and the
//! benchmark scenarios.

pub mod bench;
pub mod commands;
pub mod error;
pub mod files;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "polyagg", version, about = "Aggregate flexible-load polytopes")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Base seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte-Carlo sample budget per estimate.
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Record wall-clock times in CSV output (makes reruns differ).
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Outer-approximate the Minkowski sum of a load population.
    Aggregate(AggregateArgs),
    /// Estimate or compute a polytope's volume.
    Volume(VolumeArgs),
    /// Storage-pair error benchmark.
    BenchStorage(BenchStorageArgs),
    /// TCL population benchmark across slot counts.
    BenchTcl(BenchTclArgs),
    /// Multi-period dispatch with aggregate polytopes.
    Dispatch(DispatchArgs),
    /// Write a random load population file.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Population JSON file.
    pub input: PathBuf,
    /// Drop redundant rows of each load first.
    #[arg(long)]
    pub remove_redundancy: bool,
    /// Metadata sidecar path; defaults to `<output>.meta.json`.
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
pub struct VolumeArgs {
    /// Polytope JSON file.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Mc)]
    pub method: Method,
    /// Case identifier written to the report.
    #[arg(long, default_value = "case")]
    pub case_id: String,
}

#[derive(Debug, Args)]
pub struct BenchStorageArgs {
    /// JSON configuration; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Comma-separated dimensions compared with the exact oracle.
    #[arg(long, value_delimiter = ',')]
    pub oracle_dims: Option<Vec<usize>>,
    /// Comma-separated dimensions with Monte-Carlo volumes only.
    #[arg(long, value_delimiter = ',')]
    pub mc_dims: Option<Vec<usize>>,
    /// Summary JSON path; a gnuplot table is written next to it.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchTclArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub loads: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub slots: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct DispatchArgs {
    /// Dispatch case JSON file.
    pub input: PathBuf,
    /// Per-period trajectory CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenerateKind {
    Tcl,
    Storage,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: GenerateKind,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub periods: usize,
    #[arg(long, value_enum, default_value_t = Heterogeneity::Low)]
    pub heterogeneity: Heterogeneity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Heterogeneity {
    Low,
    High,
}

impl From<Heterogeneity> for polyagg::loads::Heterogeneity {
    fn from(h: Heterogeneity) -> Self {
        match h {
            Heterogeneity::Low => Self::Low,
            Heterogeneity::High => Self::High,
        }
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.global.threads {
        // A pool may already exist when called repeatedly in-process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let g = &cli.global;
    match &cli.command {
        Command::Aggregate(a) => commands::aggregate(g, a),
        Command::Volume(a) => commands::volume(g, a),
        Command::BenchStorage(a) => commands::bench_storage(g, a),
        Command::BenchTcl(a) => commands::bench_tcl(g, a),
        Command::Dispatch(a) => commands::dispatch(g, a),
        Command::Generate(a) => commands::generate(g, a),
    }
}
