//! `netdeg`: generate graphs, simulate steady states, sample subgraphs,
//! estimate degrees and run evaluation grids from the command line.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::{CliError, ExitKind};

#[derive(Debug, Parser)]
#[command(name = "netdeg", version, about = "Infer vertex degrees from steady states of network dynamics")]
struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic graph as an edge list.
    Generate(GenerateArgs),
    /// Simulate the steady state of a dynamics model on a graph.
    Simulate(SimulateArgs),
    /// Draw a subgraph (and optionally noisy states).
    Sample(SampleArgs),
    /// Estimate degrees from states and an optional subgraph.
    Estimate(EstimateArgs),
    /// Run an accuracy grid described by a TOML config.
    Evaluate(EvaluateArgs),
    /// Run the link-prediction study described by a TOML config.
    Linkpred(LinkpredArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GraphModel {
    Ba,
    Er,
    Regular,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output path.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Overwrite existing outputs.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub model: GraphModel,
    #[arg(long)]
    pub n: usize,
    /// Edges per new vertex (ba).
    #[arg(long)]
    pub attach: Option<usize>,
    /// Edge count (er).
    #[arg(long)]
    pub m: Option<usize>,
    /// Degree (regular).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    /// ecological | regulatory | epidemic
    #[arg(long)]
    pub family: String,
    /// Parameter override, e.g. `--param B=0.5`; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[command(flatten)]
    pub dynamics: DynamicsArgs,
    /// Initial state for every vertex (default: the family's default).
    #[arg(long)]
    pub x0: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// uniform | random_walk | induced
    #[arg(long, default_value = "uniform")]
    pub sampler: String,
    /// Edge fraction (vertex fraction for induced).
    #[arg(long)]
    pub fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// States to corrupt with multiplicative noise.
    #[arg(long, requires = "noisy_output")]
    pub states: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Where to write the noisy states.
    #[arg(long, requires = "states")]
    pub noisy_output: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub states: PathBuf,
    #[command(flatten)]
    pub dynamics: DynamicsArgs,
    /// zerotopo | topoplus | round
    #[arg(long, default_value = "topoplus")]
    pub estimator: String,
    /// Sampled subgraph (edge list, with optional `.vertices` sidecar).
    #[arg(long)]
    pub subgraph: Option<PathBuf>,
    /// Earlier estimate to refine (round only).
    #[arg(long)]
    pub prior: Option<PathBuf>,
    /// Only the subgraph's vertices have observed states.
    #[arg(long)]
    pub observed_only: bool,
    /// True graph, to report accuracy.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config's repetitions.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Keep per-vertex estimates.
    #[arg(long)]
    pub per_vertex: bool,
    /// Output prefix: writes PREFIX.csv and PREFIX.json.
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LinkpredArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Overrides the config's sampling fraction.
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Output prefix: writes PREFIX.csv and PREFIX.json.
    #[command(flatten)]
    pub out: OutputArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(ExitKind::Usage as u8) } else { ExitCode::SUCCESS };
        }
    };
    let result: Result<(), CliError> = match &cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Sample(a) => commands::sample(a),
        Command::Estimate(a) => commands::estimate(a, cli.jobs),
        Command::Evaluate(a) => commands::evaluate(a, cli.jobs),
        Command::Linkpred(a) => commands::linkpred(a, cli.jobs),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind as u8)
        }
    }
}
