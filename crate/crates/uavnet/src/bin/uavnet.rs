//! Command-line entry point: `uavnet --scenario s.json --algo blll --out runs/x`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use uavnet::cli::{run_manifest, Algorithm, RunManifest};

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum AlgoArg {
    Blll,
    Greedy,
    // accept the snake_case spellings the artifacts use
    #[value(alias = "kmeans_greedy")]
    KmeansGreedy,
    #[value(alias = "adapted_greedy")]
    AdaptedGreedy,
    Oracle,
    Validate,
    Sweep,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Blll => Algorithm::Blll,
            AlgoArg::Greedy => Algorithm::Greedy,
            AlgoArg::KmeansGreedy => Algorithm::KmeansGreedy,
            AlgoArg::AdaptedGreedy => Algorithm::AdaptedGreedy,
            AlgoArg::Oracle => Algorithm::Oracle,
            AlgoArg::Validate => Algorithm::Validate,
            AlgoArg::Sweep => Algorithm::Sweep,
        }
    }
}

/// UAV placement and user-association experiment runner.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Algorithm to run.
    #[arg(long)]
    algo: AlgoArg,
    /// Output directory for trace.csv, result.json, meta.json.
    #[arg(long)]
    out: PathBuf,
    /// Algorithm seed; defaults to the scenario's rng_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Iteration budget (blll, sweep).
    #[arg(long)]
    iters: Option<u64>,
    /// Initial temperature; estimated from warm-up states when omitted.
    #[arg(long)]
    t0: Option<f64>,
    /// Neighborhood range as a fraction of the search-box diagonal (blll).
    #[arg(long)]
    range_frac: Option<f64>,
    /// Explicit configuration set JSON (greedy).
    #[arg(long)]
    configs: Option<PathBuf>,
    /// Sweep range fractions, comma separated (sweep).
    #[arg(long, value_delimiter = ',')]
    ranges: Vec<f64>,
    /// Sweep seeds, comma separated (sweep).
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Deviation samples for the validation suite.
    #[arg(long)]
    validate_samples: Option<u64>,
    /// Placement budget for exhaustive searches.
    #[arg(long)]
    max_configs: Option<u64>,
    /// Association-state budget for the oracle.
    #[arg(long)]
    max_assoc_states: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let manifest = RunManifest {
        seed: args.seed,
        iters: args.iters,
        t0: args.t0,
        range_frac: args.range_frac,
        configs: args.configs,
        sweep_ranges: args.ranges,
        sweep_seeds: args.seeds,
        validate_samples: args.validate_samples,
        max_configs: args.max_configs,
        max_assoc_states: args.max_assoc_states,
        ..RunManifest::new(args.scenario, args.algo.into(), args.out)
    };
    match run_manifest(&manifest) {
        Ok(summary) => {
            match summary.sum_rate_bps {
                Some(v) => println!(
                    "{}: sum_rate_bps={v} -> {}",
                    manifest.algorithm.name(),
                    summary.out_dir.display()
                ),
                None => println!(
                    "{}: -> {}",
                    manifest.algorithm.name(),
                    summary.out_dir.display()
                ),
            }
            if summary.all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
