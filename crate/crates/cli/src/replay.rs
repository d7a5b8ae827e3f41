use std::path::{Path, PathBuf};

use crate::check::Check;
use crate::error::{CliError, Result};
use crate::experiments;
use crate::output::{SeedReport, PATHS_FILE, REPORT_FILE};
use crate::table::Table;

/// A stored seed re-judged from its persisted table.
pub struct Replayed {
    pub dir: PathBuf,
    pub recorded: SeedReport,
    pub checks: Vec<Check>,
}

impl Replayed {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Whether the recomputed rows differ from the ones stored in the report.
    pub fn diverged(&self) -> bool {
        self.checks.len() != self.recorded.checks.len()
            || self.checks.iter().zip(&self.recorded.checks).any(|(a, b)| a.label != b.label || a.pass != b.pass || a.value.to_bits() != b.value.to_bits())
    }
}

/// Seed directories under `root`: `root` itself when it holds a report,
/// otherwise every directory up to two levels down that does, sorted.
pub fn discover(root: &Path) -> Result<Vec<PathBuf>> {
    if !root.is_dir() {
        return Err(CliError::Io { path: root.to_path_buf(), source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such directory") });
    }
    if root.join(REPORT_FILE).is_file() {
        return Ok(vec![root.to_path_buf()]);
    }
    let mut found = Vec::new();
    let mut frontier = vec![root.to_path_buf()];
    for _ in 0..2 {
        let mut next = Vec::new();
        for dir in frontier {
            for entry in std::fs::read_dir(&dir).map_err(CliError::io(&dir))? {
                let p = entry.map_err(CliError::io(&dir))?.path();
                if p.is_dir() {
                    if p.join(REPORT_FILE).is_file() {
                        found.push(p);
                    } else {
                        next.push(p);
                    }
                }
            }
        }
        frontier = next;
    }
    if found.is_empty() {
        return Err(CliError::Io {
            path: root.join(REPORT_FILE),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no report found"),
        });
    }
    found.sort();
    Ok(found)
}

/// Re-evaluates the checks of one seed directory from `paths.csv`, using the
/// config stored in `report.json`. Nothing is simulated.
pub fn replay_seed(dir: &Path) -> Result<Replayed> {
    let recorded = SeedReport::read(&dir.join(REPORT_FILE))?;
    recorded.config.validate()?;
    let table = Table::read(&dir.join(PATHS_FILE))?;
    let checks = experiments::evaluate(&recorded.config, &table)?;
    Ok(Replayed { dir: dir.to_path_buf(), recorded, checks })
}

pub fn replay(root: &Path) -> Result<Vec<Replayed>> {
    discover(root)?.iter().map(|d| replay_seed(d)).collect()
}
