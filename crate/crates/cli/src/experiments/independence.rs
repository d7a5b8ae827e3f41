use pathcalc_core::riemann::{limit_in_probability, ConvergenceSetup, FunctionalTemplate, SchemeLadder};
use pathcalc_core::TwoIndexFn;

use crate::check::{short, Check};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::table::{num, Table};

fn dyadic_column(level: u32) -> String {
    format!("dyadic_L{level}")
}

fn hitting_column(eps: f64) -> String {
    format!("hitting_eps{eps}")
}

fn template(cfg: &ExperimentConfig) -> Result<FunctionalTemplate> {
    Ok(FunctionalTemplate::new(match cfg.functions.first() {
        Some(spec) => TwoIndexFn::hat(&spec.build()?),
        None => TwoIndexFn::quadratic(),
    }))
}

/// One row per path: the pathwise sum on every dyadic and hitting-time grid.
pub fn simulate(cfg: &ExperimentConfig, seed: u64) -> Result<Table> {
    let setup = ConvergenceSetup {
        model: cfg.model.clone(),
        n_steps: cfg.n_steps(),
        horizon: cfg.horizon,
        n_paths: cfg.n_paths,
        seed,
        eps: cfg.tolerances.eps,
        delta: cfg.tolerances.delta,
    };
    let ladders = [SchemeLadder::dyadic(cfg.levels.iter().copied()), SchemeLadder::hitting(cfg.hitting_eps.iter().copied())];
    let d = limit_in_probability(&template(cfg)?, &setup, &ladders)?;
    if let Some(note) = d.notes.first() {
        return Err(CliError::config(note.clone()));
    }
    let mut header = vec!["path".to_string()];
    header.extend(cfg.levels.iter().map(|&l| dyadic_column(l)));
    header.extend(cfg.hitting_eps.iter().map(|&e| hitting_column(e)));
    let mut t = Table::with_header(header);
    for i in 0..cfg.n_paths {
        let mut row = vec![i.to_string()];
        for s in &d.schemes {
            row.extend(s.estimates.iter().map(|level| num(level[i])));
        }
        t.push(row);
    }
    Ok(t)
}

/// Finest dyadic and finest hitting-time estimates agree within `eps` on at
/// least an `agreement` fraction of paths.
pub fn evaluate(cfg: &ExperimentConfig, table: &Table) -> Result<Vec<Check>> {
    let tol = &cfg.tolerances;
    let fine_eps = *cfg.hitting_eps.last().expect("validated");
    let a = table.nums(&dyadic_column(cfg.max_level()))?;
    let b = table.nums(&hitting_column(fine_eps))?;
    let close = a.iter().zip(&b).filter(|(x, y)| (*x - *y).abs() <= tol.eps).count();
    let frac = close as f64 / a.len() as f64;
    Ok(vec![Check::at_least(
        format!(
            "P(|dyadic L{} − hitting ε={}| ≤ {}) = {frac:.3} ≥ {}",
            cfg.max_level(),
            short(fine_eps),
            short(tol.eps),
            short(tol.agreement)
        ),
        frac,
        tol.agreement,
    )])
}
