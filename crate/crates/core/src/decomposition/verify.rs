use serde::{Deserialize, Serialize};

use super::report::{DecompositionMode, DecompositionReport};
use crate::error::{Error, Result};
use crate::stats::mean;

/// One named comparison of a measured value against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckOutcome {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        CheckOutcome { name: name.into(), value, threshold, pass: value <= threshold }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        CheckOutcome { name: name.into(), value, threshold, pass: value >= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub mode: DecompositionMode,
    pub tol: f64,
    pub checks: Vec<CheckOutcome>,
    pub pass: bool,
}

impl Verdict {
    fn new(mode: DecompositionMode, tol: f64, checks: Vec<CheckOutcome>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Verdict { mode, tol, checks, pass }
    }
}

/// Checks one report against the claims of `mode`.
///
/// Itô: the residual vanishes. Tanaka: the residual starts at 0, never
/// decreases by more than `tol` and does not move across jumps of `X`. Both
/// modes require the term identity to close.
pub fn verify_report(report: &DecompositionReport, mode: DecompositionMode, tol: f64) -> Verdict {
    let mut checks = vec![CheckOutcome::at_most("max |identity gap|", report.max_abs_identity_gap(), tol)];
    match mode {
        DecompositionMode::Ito => {
            checks.push(CheckOutcome::at_most("max |residual|", report.max_abs_residual(), tol));
        }
        DecompositionMode::Tanaka => {
            let start = report.residual.first().copied().unwrap_or(0.0).abs();
            let min_inc = if report.len() < 2 { 0.0 } else { report.min_residual_increment() };
            checks.push(CheckOutcome::at_most("|residual at 0|", start, tol));
            checks.push(CheckOutcome::at_least("min residual increment", min_inc, -tol));
            checks.push(CheckOutcome::at_most("max residual jump", report.max_residual_jump(), tol));
        }
    }
    Verdict::new(mode, tol, checks)
}

/// Checks batches of reports on the same paths at increasing grid levels.
///
/// Every report must pass [`verify_report`], and the mean absolute
/// realised-minus-closed-form compensator at the horizon must not grow from
/// the coarsest to the finest level. In Tanaka mode the mean largest residual
/// step per cell must not grow either.
pub fn verify_levels(levels: &[&[DecompositionReport]], mode: DecompositionMode, tol: f64) -> Result<Verdict> {
    if levels.len() < 2 || levels.iter().any(|l| l.is_empty()) {
        return Err(Error::invalid("need at least two nonempty levels"));
    }
    if levels.iter().any(|l| l.len() != levels[0].len()) {
        return Err(Error::invalid("every level needs one report per path"));
    }
    let total: usize = levels.iter().map(|l| l.len()).sum();
    let passing = levels.iter().flat_map(|l| l.iter()).filter(|r| verify_report(r, mode, tol).pass).count();
    let mut checks = vec![CheckOutcome::at_least("fraction of passing reports", passing as f64 / total as f64, 1.0)];

    let defect = |l: &[DecompositionReport]| mean(&l.iter().map(|r| r.bracket_defect().abs()).collect::<Vec<_>>());
    let (first, last) = (levels[0], levels[levels.len() - 1]);
    checks.push(CheckOutcome::at_most("mean |bracket defect| at finest level", defect(last), defect(first)));
    if mode == DecompositionMode::Tanaka {
        let step = |l: &[DecompositionReport]| mean(&l.iter().map(|r| r.max_cell_increment()).collect::<Vec<_>>());
        checks.push(CheckOutcome::at_most("mean max residual step at finest level", step(last), step(first)));
    }
    Ok(Verdict::new(mode, tol, checks))
}
