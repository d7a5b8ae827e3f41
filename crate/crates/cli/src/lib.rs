//! Batch runner for pathcalc experiments.
//!
//! A run reads one JSON config, simulates every configured seed and writes
//! `<out>/<experiment>/<seed>/{paths.csv, report.json, summary.txt}` plus an
//! `aggregate.json` per experiment. Replay re-judges stored tables without
//! simulating anything.

pub mod catalog;
pub mod check;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod replay;
pub mod table;

pub use check::Check;
pub use config::{ExperimentConfig, ExperimentKind, Overrides, SCHEMA_VERSION};
pub use error::{CliError, Result};
pub use output::{run, RunOutcome, SeedReport};
pub use replay::{replay, Replayed};
