use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::functional::{pathwise_sum, FunctionalTemplate};
use super::grid::{riemann_grid, GridScheme};
use crate::error::{Error, Result};
use crate::mc::par_map;
use crate::path::{simulate, PathModel};
use crate::rng::derive_seed;

/// A named sequence of grid parameters, coarse to fine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeLadder {
    pub name: String,
    pub levels: Vec<GridScheme>,
}

impl SchemeLadder {
    pub fn dyadic(levels: impl IntoIterator<Item = u32>) -> Self {
        SchemeLadder { name: "dyadic".into(), levels: levels.into_iter().map(|level| GridScheme::Dyadic { level }).collect() }
    }

    pub fn hitting(eps: impl IntoIterator<Item = f64>) -> Self {
        SchemeLadder { name: "hitting".into(), levels: eps.into_iter().map(|eps| GridScheme::HittingTimes { eps }).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSetup {
    pub model: PathModel,
    pub n_steps: usize,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub eps: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeTrace {
    pub name: String,
    pub levels: Vec<GridScheme>,
    /// `estimates[level][path]`.
    pub estimates: Vec<Vec<f64>>,
    /// Empirical `P(|S_k - S_{k+1}| > eps)` for consecutive levels.
    pub tail_probs: Vec<f64>,
    /// Tails non-increasing and the last one below `delta`.
    pub cauchy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceDiagnostic {
    pub label: String,
    pub eps: f64,
    pub delta: f64,
    pub n_paths: usize,
    pub schemes: Vec<SchemeTrace>,
    /// `P(|S^first - S^other| > eps)` at the finest level, one entry per
    /// scheme after the first.
    pub cross_tail_probs: Vec<f64>,
    pub verdict: bool,
    pub notes: Vec<String>,
}

impl ConvergenceDiagnostic {
    /// `scheme,level,grid,mean_estimate,tail_prob` rows; the tail column of a
    /// level is the tail between it and the next finer level.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("scheme,level,grid,mean_estimate,tail_prob\n");
        for s in &self.schemes {
            for (k, est) in s.estimates.iter().enumerate() {
                let mean = est.iter().sum::<f64>() / est.len() as f64;
                let tail = s.tail_probs.get(k).map_or(String::new(), |t| t.to_string());
                let _ = writeln!(out, "{},{},{},{},{}", s.name, k, s.levels[k].label(), mean, tail);
            }
        }
        out
    }
}

fn tail_prob(a: &[f64], b: &[f64], eps: f64) -> f64 {
    let hits = a.iter().zip(b).filter(|(x, y)| !((*x - *y).abs() <= eps)).count();
    hits as f64 / a.len() as f64
}

/// Monte Carlo check that pathwise sums converge in probability along each
/// ladder and that different ladders agree in the limit.
///
/// Grid construction failures (for instance a lattice finer than the path) do
/// not abort the run; they are listed in `notes` and make the verdict false.
pub fn limit_in_probability(template: &FunctionalTemplate, setup: &ConvergenceSetup, ladders: &[SchemeLadder]) -> Result<ConvergenceDiagnostic> {
    if ladders.len() < 2 {
        return Err(Error::invalid("grid independence needs at least two schemes"));
    }
    if ladders.iter().any(|l| l.levels.len() < 2) {
        return Err(Error::invalid("every scheme needs at least two levels"));
    }
    if setup.n_paths == 0 || !(setup.eps > 0.0) || !(setup.delta > 0.0 && setup.delta <= 1.0) {
        return Err(Error::invalid("need n_paths >= 1, eps > 0 and delta in (0, 1]"));
    }
    setup.model.validate()?;
    if setup.n_steps == 0 || !(setup.horizon > 0.0) {
        return Err(Error::invalid("need n_steps >= 1 and a positive horizon"));
    }

    // per path: estimates[ladder][level], or the first grid error
    let per_path: Vec<std::result::Result<Vec<Vec<f64>>, String>> = par_map(setup.n_paths, |i| {
        let path = simulate(&setup.model, setup.n_steps, setup.horizon, derive_seed(setup.seed, i as u64)).map_err(|e| e.to_string())?;
        let f = template.bind(&path);
        ladders
            .iter()
            .map(|l| {
                l.levels
                    .iter()
                    .map(|&scheme| {
                        let grid = riemann_grid(&path, scheme).map_err(|e| format!("path {i}, {}: {e}", scheme.label()))?;
                        pathwise_sum(&f, &grid).map_err(|e| e.to_string())
                    })
                    .collect()
            })
            .collect()
    });

    let mut notes = Vec::new();
    if let Some(Err(e)) = per_path.iter().find(|r| r.is_err()) {
        let failed = per_path.iter().filter(|r| r.is_err()).count();
        notes.push(format!("{failed} of {} paths could not be evaluated; first failure: {e}", setup.n_paths));
    }

    let mut schemes = Vec::with_capacity(ladders.len());
    for (li, l) in ladders.iter().enumerate() {
        let estimates: Vec<Vec<f64>> = (0..l.levels.len())
            .map(|k| per_path.iter().map(|r| r.as_ref().map_or(f64::NAN, |v| v[li][k])).collect())
            .collect();
        let tail_probs: Vec<f64> = estimates.windows(2).map(|w| tail_prob(&w[0], &w[1], setup.eps)).collect();
        let cauchy = tail_probs.windows(2).all(|w| w[1] <= w[0]) && *tail_probs.last().unwrap() < setup.delta;
        schemes.push(SchemeTrace { name: l.name.clone(), levels: l.levels.clone(), estimates, tail_probs, cauchy });
    }
    let finest = |s: &SchemeTrace| s.estimates.last().unwrap().clone();
    let reference = finest(&schemes[0]);
    let cross_tail_probs: Vec<f64> = schemes[1..].iter().map(|s| tail_prob(&reference, &finest(s), setup.eps)).collect();
    let verdict = notes.is_empty() && schemes.iter().all(|s| s.cauchy) && cross_tail_probs.iter().all(|p| *p < setup.delta);
    Ok(ConvergenceDiagnostic {
        label: format!("{}(X) under {}", template.base.label(), setup.model.label()),
        eps: setup.eps,
        delta: setup.delta,
        n_paths: setup.n_paths,
        schemes,
        cross_tail_probs,
        verdict,
        notes,
    })
}
