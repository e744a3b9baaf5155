//! albench: pool-based active-learning benchmark for L2-regularized
//! logistic regression.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::{cmd_bench, cmd_curves, cmd_prefmap, BenchArgs, CurvesArgs, PrefmapArgs};
use config::Overrides;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "albench",
    version,
    about = "Benchmark query strategies for pool-based active learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the benchmark grid; writes report CSVs and manifest.json.
    Bench {
        /// JSON config file; defaults cover the three synthetic datasets.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for the run.
        #[arg(long)]
        out: PathBuf,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Query budget override.
        #[arg(long)]
        budget: Option<usize>,
        /// Worker thread count override (0 = all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Comma-separated strategy ids to run.
        #[arg(long, value_delimiter = ',')]
        strategies: Option<Vec<String>>,
        /// Repetition count override, applied to every dataset.
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Render query-location density grids from a finished run.
    Prefmap {
        /// Run directory produced by bench.
        #[arg(long)]
        run: PathBuf,
        /// Only this dataset (default: every 2D dataset in the run).
        #[arg(long)]
        dataset: Option<String>,
        /// Comma-separated strategy ids (default: all in the run).
        #[arg(long, value_delimiter = ',')]
        strategies: Option<Vec<String>>,
        /// first_query, exp_decay, or both.
        #[arg(long, default_value = "both")]
        scheme: String,
        /// Grid points per axis.
        #[arg(long, default_value_t = 100)]
        resolution: usize,
    },
    /// Write per-dataset learning-curve CSVs from a finished run.
    Curves {
        /// Run directory produced by bench.
        #[arg(long)]
        run: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Bench {
            config,
            out,
            seed,
            budget,
            workers,
            strategies,
            reps,
        } => cmd_bench(BenchArgs {
            config,
            out,
            overrides: Overrides {
                master_seed: seed,
                budget,
                workers,
                strategies,
                reps,
            },
        }),
        Command::Prefmap {
            run,
            dataset,
            strategies,
            scheme,
            resolution,
        } => cmd_prefmap(PrefmapArgs {
            run,
            dataset,
            strategies,
            scheme,
            resolution,
        }),
        Command::Curves { run } => cmd_curves(CurvesArgs { run }),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

/// 0 success, 1 runtime failure, 2 invalid configuration, 3 data failure.
fn exit_code(err: &albench_core::Error) -> i32 {
    use albench_core::Error;
    match err {
        Error::Config(_) | Error::UnknownStrategy(_) | Error::PoolExhausted { .. } => 2,
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::SingleClass(_)
        | Error::NoFeatureColumns
        | Error::NonFinite { .. }
        | Error::SplitRetriesExhausted(_)
        | Error::NotTwoDimensional(_) => 3,
        Error::Factorization(_) | Error::NonFiniteObjective => 1,
    }
}
