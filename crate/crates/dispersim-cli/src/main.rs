//! Configuration-driven driver: run simulations and studies, emit CSV and
//! binary artifacts plus a human-readable summary.
//!
//! Exit codes: 0 success; 1 configuration error; 2 solver non-convergence
//! after the dt/2 retry ladder; 3 gauge calibration failure. Every failure
//! prints one machine-parsable line on stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod report;
mod runner;

#[derive(Parser)]
#[command(name = "dispersim", version, about = "Pseudospectral simulator for third-order dispersive equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Run {
        /// Path to the experiment config.
        config: String,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<String>,
        /// Override the configured random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Suppress progress output (artifacts are still written).
        #[arg(long)]
        quiet: bool,
    },
    /// Re-print the summary of a completed run directory.
    Report {
        /// Artifact directory of a completed run.
        dir: String,
    },
}

fn init_thread_cap() {
    if let Ok(value) = std::env::var("DISPERSIM_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    init_thread_cap();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, seed, quiet } => {
            let mut cfg = match config::ExperimentConfig::load(&config) {
                Ok(cfg) => cfg,
                Err(err) => {
                    let reason = format!("{err:#}").replace('\n', " ");
                    eprintln!("error: code=1 reason=config-error detail={reason}");
                    return ExitCode::from(1);
                }
            };
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            match runner::execute(&cfg, quiet) {
                Ok(()) => ExitCode::SUCCESS,
                Err(err) => {
                    eprintln!("error: code={} reason={}", err.code(), err.reason());
                    ExitCode::from(err.code())
                }
            }
        }
        Command::Report { dir } => match report::print_report(&PathBuf::from(dir)) {
            Ok(text) => {
                println!("{text}");
                ExitCode::SUCCESS
            }
            Err(err) => {
                let reason = format!("{err:#}").replace('\n', " ");
                eprintln!("error: code=1 reason=missing-artifacts detail={reason}");
                ExitCode::from(1)
            }
        },
    }
}
