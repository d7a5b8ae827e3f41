//! Each experiment is split in two: `simulate` does the expensive work and
//! returns the per-row table persisted as `paths.csv`; `evaluate` turns a
//! table into PASS/FAIL rows using nothing but the numbers in it, so replay
//! can re-judge stored results.

mod compensator;
mod decomposition;
mod functional;
mod independence;
mod qv;

use crate::check::Check;
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::table::Table;

pub fn simulate(cfg: &ExperimentConfig, seed: u64) -> Result<Table> {
    match cfg.kind {
        ExperimentKind::Summability => functional::simulate_summability(cfg, seed),
        ExperimentKind::Taylor => functional::simulate_taylor(cfg),
        ExperimentKind::Qv => qv::simulate(cfg, seed),
        ExperimentKind::Ito | ExperimentKind::Tanaka => decomposition::simulate(cfg, seed),
        ExperimentKind::Compensator => compensator::simulate(cfg, seed),
        ExperimentKind::Independence => independence::simulate(cfg, seed),
    }
}

pub fn evaluate(cfg: &ExperimentConfig, table: &Table) -> Result<Vec<Check>> {
    match cfg.kind {
        ExperimentKind::Summability => functional::evaluate_summability(cfg, table),
        ExperimentKind::Taylor => functional::evaluate_taylor(cfg, table),
        ExperimentKind::Qv => qv::evaluate(cfg, table),
        ExperimentKind::Ito => decomposition::evaluate_ito(cfg, table),
        ExperimentKind::Tanaka => decomposition::evaluate_tanaka(cfg, table),
        ExperimentKind::Compensator => compensator::evaluate(cfg, table),
        ExperimentKind::Independence => independence::evaluate(cfg, table),
    }
}

/// Row label prefix naming the function when a config lists several.
fn prefix(cfg: &ExperimentConfig, label: &str) -> String {
    if cfg.functions.len() > 1 {
        format!("{label}: ")
    } else {
        String::new()
    }
}

fn max(xs: &[f64]) -> f64 {
    xs.iter().fold(f64::NEG_INFINITY, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(*x) })
}

fn min(xs: &[f64]) -> f64 {
    -max(&xs.iter().map(|x| -x).collect::<Vec<_>>())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reductions_propagate_nan() {
        assert_eq!(max(&[1.0, 3.0, 2.0]), 3.0);
        assert_eq!(min(&[1.0, 3.0, -2.0]), -2.0);
        assert!(max(&[1.0, f64::NAN, 2.0]).is_nan());
        assert!(min(&[f64::NAN]).is_nan());
        assert_eq!(mean(&[1.0, 2.0]), 1.5);
    }
}
