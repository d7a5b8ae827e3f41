use pathcalc_core::functional::{summability_limit, taylor_check, RefinementScheme, TaylorOptions};
use pathcalc_core::TwoIndexFn;

use super::{max, prefix};
use crate::check::{sci, Check};
use crate::config::{ExperimentConfig, Refinement};
use crate::error::{CliError, Result};
use crate::table::{num, Table};

fn scheme(cfg: &ExperimentConfig, seed: u64) -> RefinementScheme {
    match cfg.refinement {
        Refinement::Dyadic => RefinementScheme::Dyadic { max_level: cfg.max_level() },
        Refinement::RandomBisection => RefinementScheme::RandomBisection { seed, max_level: cfg.max_level() },
    }
}

/// One row per (function, level) of the refinement chain of `f(y) - f(x)`.
pub fn simulate_summability(cfg: &ExperimentConfig, seed: u64) -> Result<Table> {
    let (a, b) = cfg.interval();
    let mut t = Table::new(&["fn_index", "function", "level", "cells", "mesh", "value", "target"]);
    for (fi, spec) in cfg.functions.iter().enumerate() {
        let f = spec.build()?;
        let est = summability_limit(&TwoIndexFn::hat(&f), a, b, &scheme(cfg, seed), cfg.tolerances.summability)?;
        let target = f.eval(b) - f.eval(a);
        for l in &est.trace {
            t.push(vec![fi.to_string(), f.label().to_string(), l.level.to_string(), l.cells.to_string(), num(l.mesh), num(l.value), num(target)]);
        }
    }
    Ok(t)
}

/// The last two level-to-level changes stay below the settling tolerance and
/// the final sum matches `f(b) - f(a)`.
pub fn evaluate_summability(cfg: &ExperimentConfig, table: &Table) -> Result<Vec<Check>> {
    let tol = cfg.tolerances.summability;
    let mut checks = Vec::new();
    for fi in 0..cfg.functions.len() {
        let rows = table.select("fn_index", &fi.to_string())?;
        let values = rows.nums("value")?;
        let target = rows.nums("target")?;
        let label = rows.texts("function")?.first().map(|s| s.to_string()).ok_or_else(|| CliError::Table(format!("no rows for function {fi}")))?;
        let pfx = prefix(cfg, &label);
        let steps: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let settle = if steps.len() >= 2 { max(&steps[steps.len() - 2..]) } else { f64::INFINITY };
        checks.push(Check::new(format!("{pfx}last level changes {} < {}", sci(settle), sci(tol)), settle, settle < tol));
        let miss = (values[values.len() - 1] - target[target.len() - 1]).abs();
        checks.push(Check::at_most(format!("{pfx}|I − (f(b) − f(a))| {} ≤ {}", sci(miss), sci(tol)), miss, tol));
    }
    Ok(checks)
}

/// One row per function: the order-k expansion of `f(y) - f(x)` on the interval.
pub fn simulate_taylor(cfg: &ExperimentConfig) -> Result<Table> {
    let (a, b) = cfg.interval();
    let k = cfg.order.expect("validated");
    let opts = TaylorOptions {
        max_level: cfg.max_level(),
        summability_tol: cfg.tolerances.summability,
        gap_tol: cfg.tolerances.taylor_gap,
        ..TaylorOptions::default()
    };
    let mut t = Table::new(&[
        "fn_index",
        "function",
        "order",
        "integral",
        "integral_converged",
        "remainder",
        "remainder_bound",
        "ratio_inf",
        "ratio_sup",
        "identity_gap",
        "applicable",
        "bound_rtol",
    ]);
    for (fi, spec) in cfg.functions.iter().enumerate() {
        let f = spec.build()?;
        let r = taylor_check(&TwoIndexFn::hat(&f), a, b, k, &opts)?;
        t.push(vec![
            fi.to_string(),
            f.label().to_string(),
            k.to_string(),
            num(r.integral),
            (r.integral_converged as u8).to_string(),
            num(r.remainder),
            num(r.remainder_bound),
            num(r.ratio_inf),
            num(r.ratio_sup),
            num(r.identity_gap),
            (r.applicable as u8).to_string(),
            num(opts.bound_rtol),
        ]);
    }
    Ok(t)
}

pub fn evaluate_taylor(cfg: &ExperimentConfig, table: &Table) -> Result<Vec<Check>> {
    let (labels, applicable, converged) = (table.texts("function")?, table.nums("applicable")?, table.nums("integral_converged")?);
    let (gap, rem, bound, rtol) = (table.nums("identity_gap")?, table.nums("remainder")?, table.nums("remainder_bound")?, table.nums("bound_rtol")?);
    let mut checks = Vec::new();
    for i in 0..table.len() {
        let pfx = prefix(cfg, labels[i]);
        checks.push(Check::new(format!("{pfx}lower-order right derivatives exist at a"), applicable[i], applicable[i] == 1.0));
        checks.push(Check::new(format!("{pfx}partition limit settled"), converged[i], converged[i] == 1.0));
        checks.push(Check::at_most(format!("{pfx}identity gap {} ≤ {}", sci(gap[i]), sci(cfg.tolerances.taylor_gap)), gap[i], cfg.tolerances.taylor_gap));
        let limit = bound[i] * (1.0 + rtol[i]) + rtol[i];
        checks.push(Check::at_most(format!("{pfx}|remainder| {} ≤ ratio bound {}", sci(rem[i].abs()), sci(bound[i])), rem[i].abs(), limit));
    }
    Ok(checks)
}
