use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pathcalc_core::mc::par_map;

use crate::check::Check;
use crate::config::{check_schema, ExperimentConfig, ExperimentKind, SCHEMA_VERSION};
use crate::error::{CliError, Result};
use crate::experiments;
use crate::table::Table;

pub const PATHS_FILE: &str = "paths.csv";
pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const AGGREGATE_FILE: &str = "aggregate.json";

/// Contents of `report.json` for one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedReport {
    pub schema_version: u32,
    pub experiment: String,
    pub kind: ExperimentKind,
    pub seed: u64,
    /// The config that produced the run, without its output directory.
    pub config: ExperimentConfig,
    pub rows: usize,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SeedReport {
    pub fn new(cfg: &ExperimentConfig, seed: u64, table: &Table, checks: Vec<Check>) -> Self {
        let mut config = cfg.clone();
        config.out = None;
        SeedReport {
            schema_version: SCHEMA_VERSION,
            experiment: cfg.experiment(),
            kind: cfg.kind,
            seed,
            config,
            rows: table.len(),
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Format { path: path.to_path_buf(), msg: e.to_string() })?;
        check_schema(&doc).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
        serde_json::from_value(doc).map_err(|e| CliError::Format { path: path.to_path_buf(), msg: e.to_string() })
    }

    /// The one-page text summary: context lines, then one row per check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment {} ({}), seed {}", self.experiment, self.kind.name(), self.seed);
        if !matches!(self.kind, ExperimentKind::Summability | ExperimentKind::Taylor | ExperimentKind::Compensator) {
            let _ = writeln!(s, "model {}, {} paths, levels {:?}", self.config.model.label(), self.config.n_paths, self.config.levels);
        }
        if let Some(c) = self.config.negative_control {
            let _ = writeln!(s, "negative control {c:?}: failures below are expected");
        }
        for c in &self.checks {
            let _ = writeln!(s, "{c}");
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        let _ = writeln!(s, "verdict {}: {passed} of {} checks passed", if self.pass { "PASS" } else { "FAIL" }, self.checks.len());
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedVerdict {
    pub seed: u64,
    pub pass: bool,
    pub failed: Vec<String>,
}

/// Contents of `<experiment>/aggregate.json`, written once after all seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub schema_version: u32,
    pub experiment: String,
    pub kind: ExperimentKind,
    pub seeds: Vec<SeedVerdict>,
    pub pass: bool,
}

pub struct RunOutcome {
    pub dir: PathBuf,
    pub reports: Vec<SeedReport>,
}

impl RunOutcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

pub fn seed_dir(out: &Path, experiment: &str, seed: u64) -> PathBuf {
    out.join(experiment).join(seed.to_string())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(CliError::io(path))
}

fn run_seed(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<SeedReport> {
    let table = experiments::simulate(cfg, seed)?;
    let checks = experiments::evaluate(cfg, &table)?;
    let report = SeedReport::new(cfg, seed, &table, checks);
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    table.write(&dir.join(PATHS_FILE))?;
    write_file(&dir.join(REPORT_FILE), &report.to_json())?;
    write_file(&dir.join(SUMMARY_FILE), &report.summary())?;
    Ok(report)
}

/// Runs every seed of `cfg` concurrently, each writing its own directory,
/// then writes the aggregate.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let experiment = cfg.experiment();
    let dir = cfg.out_dir().join(&experiment);
    std::fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
    let seeds = cfg.seed_list();
    let out = cfg.out_dir();
    let reports = par_map(seeds.len(), |i| run_seed(cfg, seeds[i], &seed_dir(&out, &experiment, seeds[i]))).into_iter().collect::<Result<Vec<_>>>()?;
    let aggregate = Aggregate {
        schema_version: SCHEMA_VERSION,
        experiment,
        kind: cfg.kind,
        seeds: reports
            .iter()
            .map(|r| SeedVerdict { seed: r.seed, pass: r.pass, failed: r.checks.iter().filter(|c| !c.pass).map(|c| c.label.clone()).collect() })
            .collect(),
        pass: reports.iter().all(|r| r.pass),
    };
    write_file(&dir.join(AGGREGATE_FILE), &(serde_json::to_string_pretty(&aggregate).expect("aggregates serialize") + "\n"))?;
    Ok(RunOutcome { dir, reports })
}
