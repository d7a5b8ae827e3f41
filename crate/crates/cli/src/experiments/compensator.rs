use pathcalc_core::compensator::{catalog_pairs, compensator_closed_form, verify_compensator_with, CompensatorSetup, LinearCompensator};

use crate::check::{sci, short, Check};
use crate::config::{CompensatorPair, ExperimentConfig, NegativeControl};
use crate::error::Result;
use crate::table::{num, Table};

const HEADER: [&str; 8] = ["model", "test_process", "compensator_rate", "mean_a", "se_a", "mean_compensator", "se_compensator", "n_paths"];

fn pairs(cfg: &ExperimentConfig) -> Vec<CompensatorPair> {
    match &cfg.pairs {
        Some(p) => p.clone(),
        None => catalog_pairs().into_iter().map(|(model, test_process)| CompensatorPair { model, test_process }).collect(),
    }
}

/// One row per (model, test process) pair with both Monte Carlo means.
pub fn simulate(cfg: &ExperimentConfig, seed: u64) -> Result<Table> {
    let setup = CompensatorSetup { n_paths: cfg.n_paths, horizon: cfg.horizon, seed, n_steps: cfg.n_steps() };
    let mut t = Table::new(&HEADER);
    for p in pairs(cfg) {
        let mut comp = compensator_closed_form(&p.model)?;
        if let Some(NegativeControl::WrongIntensity { factor }) = cfg.negative_control {
            comp = LinearCompensator { rate: comp.rate * factor };
        }
        let v = verify_compensator_with(&p.model, &p.test_process, &setup, comp)?;
        t.push(vec![
            v.model,
            v.test_process,
            num(v.compensator_rate),
            num(v.integral_a.mean),
            num(v.integral_a.std_err),
            num(v.integral_compensator.mean),
            num(v.integral_compensator.std_err),
            v.integral_a.n.to_string(),
        ]);
    }
    Ok(t)
}

/// `|mean_a - mean_compensator| <= k sqrt(se_a^2 + se_compensator^2)` per row.
pub fn evaluate(cfg: &ExperimentConfig, table: &Table) -> Result<Vec<Check>> {
    let k = cfg.tolerances.se_multiplier;
    let (models, ys) = (table.texts("model")?, table.texts("test_process")?);
    let (ma, sa) = (table.nums("mean_a")?, table.nums("se_a")?);
    let (mp, sp) = (table.nums("mean_compensator")?, table.nums("se_compensator")?);
    Ok((0..table.len())
        .map(|i| {
            let diff = (ma[i] - mp[i]).abs();
            let se = (sa[i] * sa[i] + sp[i] * sp[i]).sqrt();
            Check::at_most(format!("{} × {}: |Δ| {} ≤ {}·se {}", models[i], ys[i], sci(diff), short(k), sci(k * se)), diff, k * se)
        })
        .collect())
}
