use pathcalc_core::mc::try_par_map;
use pathcalc_core::path::realized_qv;
use pathcalc_core::rng::derive_seed;
use pathcalc_core::{riemann_grid, simulate as simulate_path, BracketModel, GridScheme};

use super::mean;
use crate::check::{short, subscript, Check};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::table::{num, Table};

fn column(level: u32) -> String {
    format!("qv_L{level}")
}

/// One row per path: realized quadratic variation at every level.
pub fn simulate(cfg: &ExperimentConfig, seed: u64) -> Result<Table> {
    let rows = try_par_map(cfg.n_paths, |i| {
        let p = simulate_path(&cfg.model, cfg.n_steps(), cfg.horizon, derive_seed(seed, i as u64))?;
        let mut row = vec![i.to_string()];
        for &level in &cfg.levels {
            row.push(num(realized_qv(&p, &riemann_grid(&p, GridScheme::Dyadic { level })?)));
        }
        Ok(row)
    })?;
    let mut header = vec!["path".to_string()];
    header.extend(cfg.levels.iter().map(|&l| column(l)));
    let mut t = Table::with_header(header);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

/// Mean at the finest level inside the bracket band; when several levels are
/// given, the disagreement frequency between consecutive levels must not
/// grow and must end below `delta`.
pub fn evaluate(cfg: &ExperimentConfig, table: &Table) -> Result<Vec<Check>> {
    let tol = &cfg.tolerances;
    let target = BracketModel::from_model(&cfg.model).total(cfg.horizon);
    let (lo, hi) = (target * (1.0 - tol.qv_band), target * (1.0 + tol.qv_band));
    let finest = table.nums(&column(cfg.max_level()))?;
    let m = mean(&finest);
    let mut checks = vec![Check::new(format!("E[QV]{} ∈ [{},{}]", subscript(cfg.horizon), short(lo), short(hi)), m, m >= lo && m <= hi)];

    if cfg.levels.len() >= 2 {
        let mut tails = Vec::with_capacity(cfg.levels.len() - 1);
        for w in cfg.levels.windows(2) {
            let (a, b) = (table.nums(&column(w[0]))?, table.nums(&column(w[1]))?);
            let far = a.iter().zip(&b).filter(|(x, y)| !((*x - *y).abs() <= tol.eps)).count();
            tails.push(far as f64 / a.len() as f64);
        }
        let growth = tails.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let trace: Vec<String> = tails.iter().map(|t| format!("{t:.3}")).collect();
        checks.push(Check::at_most(format!("level-to-level tails P(|ΔQV| > {}) non-increasing [{}]", short(tol.eps), trace.join(", ")), growth, 0.0));
        let last = *tails.last().unwrap();
        checks.push(Check::at_most(
            format!("P(|QV_L{} − QV_L{}| > {}) = {last:.3} ≤ {}", cfg.levels[cfg.levels.len() - 2], cfg.max_level(), short(tol.eps), short(tol.delta)),
            last,
            tol.delta,
        ));
    }
    Ok(checks)
}
