use serde::{Deserialize, Serialize};

use super::partition::{partition_abs_sum, partition_sum, RefinementScheme};
use super::two_index::TwoIndexFn;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelValue {
    pub level: u32,
    pub cells: usize,
    pub mesh: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub estimate: f64,
    pub converged: bool,
    pub tol: f64,
    pub trace: Vec<LevelValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationEstimate {
    pub estimate: f64,
    /// Settled below the divergence threshold.
    pub finite: bool,
    pub converged: bool,
    pub threshold: f64,
    pub trace: Vec<LevelValue>,
}

fn trace_of(f: &TwoIndexFn, a: f64, b: f64, scheme: &RefinementScheme, abs: bool) -> Result<Vec<LevelValue>> {
    let mut trace = Vec::new();
    for (level, pi) in scheme.chain(a, b)?.enumerate() {
        let value = if abs { partition_abs_sum(f, &pi) } else { partition_sum(f, &pi) };
        trace.push(LevelValue { level: level as u32, cells: pi.points().len() + 1, mesh: pi.mesh(), value });
    }
    Ok(trace)
}

/// Successive values over the last three levels differ by less than `tol`.
fn cauchy_tail(trace: &[LevelValue], tol: f64) -> bool {
    trace.len() >= 3 && trace[trace.len() - 3..].windows(2).all(|w| (w[1].value - w[0].value).abs() < tol)
}

/// `I(F; a, b)` along the refinement chain of `scheme`.
pub fn summability_limit(f: &TwoIndexFn, a: f64, b: f64, scheme: &RefinementScheme, tol: f64) -> Result<LimitEstimate> {
    let trace = trace_of(f, a, b, scheme, false)?;
    let estimate = trace.last().map_or(f64::NAN, |l| l.value);
    Ok(LimitEstimate { estimate, converged: estimate.is_finite() && cauchy_tail(&trace, tol), tol, trace })
}

/// `V(F; a, b)` along the refinement chain of `scheme`.
///
/// The variation counts as infinite once a level exceeds
/// `1e6 * |F(a, b)| + 1e6`, or when the sums have not settled by the last level.
pub fn variation_limit(f: &TwoIndexFn, a: f64, b: f64, scheme: &RefinementScheme, tol: f64) -> Result<VariationEstimate> {
    let threshold = 1e6 * f.eval(a, b).abs() + 1e6;
    let trace = trace_of(f, a, b, scheme, true)?;
    let estimate = trace.last().map_or(f64::NAN, |l| l.value);
    let exceeded = trace.iter().any(|l| !(l.value <= threshold));
    let converged = !exceeded && cauchy_tail(&trace, tol);
    Ok(VariationEstimate { estimate, finite: converged, converged, threshold, trace })
}
