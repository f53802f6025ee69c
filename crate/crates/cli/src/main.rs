mod commands;
mod failure;
mod matrix_file;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::settings::{NoiseFlags, SolverFlags};

/// Learn weighted graphs from effective resistance, hitting time, or
/// personalized PageRank measurements.
#[derive(Debug, Parser)]
#[command(name = "resgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic or real graph as an edge list.
    ///
    /// Specs: `grid ROWS COLS`, `knn N K`, `tree N`, `random N P`, and
    /// `ego PATH` (largest component of a SNAP ego-network edge file).
    Generate {
        #[arg(required = true, num_args = 1.., value_name = "SPEC")]
        spec: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample pairs of a graph and record their (noisy) resistances, or with
    /// --alpha its full personalized PageRank matrix.
    Measure {
        #[arg(long)]
        graph: PathBuf,
        /// Fraction of all node pairs to measure.
        #[arg(long, default_value_t = 1.0)]
        f: f64,
        #[command(flatten)]
        noise: NoiseFlags,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn a graph from a measurement file.
    Learn {
        #[arg(long)]
        measurements: PathBuf,
        /// True graph, for generalization error and edges learned.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long)]
        out_graph: Option<PathBuf>,
        /// Metrics JSON; stdout when absent.
        #[arg(long)]
        out_metrics: Option<PathBuf>,
        #[arg(long)]
        out_trace: Option<PathBuf>,
        /// Per-pair slack CSV of the convex solver.
        #[arg(long)]
        out_report: Option<PathBuf>,
    },
    /// Score a graph against measurements and optionally the true graph.
    Eval {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        measurements: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out_metrics: Option<PathBuf>,
    },
    /// Repeated sample-learn-evaluate runs over grids of f and sigma2.
    Experiment {
        /// True graph file.
        #[arg(
            long,
            conflicts_with = "generate",
            required_unless_present = "generate"
        )]
        graph: Option<PathBuf>,
        /// Generator spec for the true graph, e.g. "grid 8 8".
        #[arg(long)]
        generate: Option<String>,
        /// Comma-separated sampling fractions.
        #[arg(long, default_value = "0.1,0.25")]
        f: String,
        #[command(flatten)]
        noise: NoiseFlags,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[command(flatten)]
        solver: SolverFlags,
        /// Aggregate CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// One CSV row per run.
        #[arg(long)]
        out_runs: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Generate { spec, seed, out } => commands::generate(&spec, seed, out.as_deref()),
        Command::Measure {
            graph,
            f,
            noise,
            seed,
            alpha,
            out,
        } => commands::measure(&graph, f, &noise, seed, alpha, out.as_deref()),
        Command::Learn {
            measurements,
            truth,
            solver,
            out_graph,
            out_metrics,
            out_trace,
            out_report,
        } => commands::learn(commands::LearnArgs {
            measurements,
            truth,
            flags: solver,
            out_graph,
            out_metrics,
            out_trace,
            out_report,
        }),
        Command::Eval {
            graph,
            measurements,
            truth,
            out_metrics,
        } => commands::eval(
            &graph,
            &measurements,
            truth.as_deref(),
            out_metrics.as_deref(),
        ),
        Command::Experiment {
            graph,
            generate,
            f,
            noise,
            reps,
            solver,
            out,
            out_runs,
        } => commands::experiment(commands::ExperimentArgs {
            graph,
            generate,
            f,
            noise,
            reps,
            flags: solver,
            out,
            out_runs,
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.exit_code()
        }
    }
}
