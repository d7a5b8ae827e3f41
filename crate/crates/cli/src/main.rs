use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pathcalc_cli::{catalog, replay, run, ExperimentConfig, Overrides, Result};

/// Runs pathcalc experiments from JSON configs and replays stored results.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 on
/// config, IO or schema errors. PATHCALC_THREADS caps the worker threads.
#[derive(Parser)]
#[command(name = "pathcalc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Run this single seed instead of the configured ones.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of simulated paths.
        #[arg(long)]
        paths: Option<usize>,
        /// Finest level; the configured level ladder is shifted to end here.
        #[arg(long)]
        level: Option<u32>,
        /// Output root directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-judge stored results from their tables without simulating.
    Replay { dir: PathBuf },
    /// List the functions, models and experiment kinds configs may name.
    Catalog,
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, seed, paths, level, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.apply(&Overrides { seed, paths, level, out })?;
            let outcome = run(&cfg)?;
            for r in &outcome.reports {
                print!("{}", r.summary());
            }
            println!("wrote {}", outcome.dir.display());
            Ok(outcome.pass())
        }
        Command::Replay { dir } => {
            let replayed = replay(&dir)?;
            for r in &replayed {
                println!("replay {} ({}, seed {})", r.dir.display(), r.recorded.experiment, r.recorded.seed);
                for c in &r.checks {
                    println!("{c}");
                }
                if r.diverged() {
                    println!("recorded verdict {} differs from the stored table", if r.recorded.pass { "PASS" } else { "FAIL" });
                }
                println!("verdict {}", if r.pass() { "PASS" } else { "FAIL" });
            }
            Ok(replayed.iter().all(|r| r.pass()))
        }
        Command::Catalog => {
            print!("{}", catalog::listing());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    pathcalc_core::mc::init_threads_from_env();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("pathcalc: {e}");
            ExitCode::from(2)
        }
    }
}
