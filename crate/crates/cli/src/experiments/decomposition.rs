use pathcalc_core::decomposition::local_time_oracle;
use pathcalc_core::mc::try_par_map;
use pathcalc_core::rng::derive_seed;
use pathcalc_core::{riemann_grid, simulate as simulate_path, BracketModel, Decomposer, FnSpec, GridScheme, SamplePath, ScalarFn};

use super::{max, mean, min, prefix};
use crate::check::{sci, short, Check};
use crate::config::{ExperimentConfig, ExperimentKind, NegativeControl};
use crate::error::{CliError, Result};
use crate::table::{num, Table};

const HEADER: [&str; 17] = [
    "fn_index",
    "function",
    "path",
    "level",
    "mesh",
    "lhs",
    "stochastic_integral",
    "compensator",
    "bracket_compensator",
    "jump_term",
    "residual",
    "residual_start",
    "max_abs_residual",
    "max_abs_identity_gap",
    "bracket_defect",
    "min_residual_increment",
    "max_residual_jump",
];

/// `(level, weight)` pairs with `f = affine + sum weight |x - level|`, for
/// which the Tanaka residual is `sum weight L^level`.
fn kink_weights(spec: &FnSpec) -> Option<Vec<(f64, f64)>> {
    match spec {
        FnSpec::Abs => Some(vec![(0.0, 1.0)]),
        FnSpec::NegAbs => Some(vec![(0.0, -1.0)]),
        FnSpec::SignPrimitive { shift } => Some(vec![(*shift, 1.0)]),
        FnSpec::PiecewiseLinear { breakpoints, slopes, .. } => {
            Some(breakpoints.iter().zip(slopes.windows(2)).map(|(b, s)| (*b, (s[1] - s[0]) / 2.0)).collect())
        }
        _ => None,
    }
}

/// `sum weight L^level_T`, with local time measured against `d<X^c> = sigma^2 dt`.
fn oracle(path: &SamplePath, weights: &[(f64, f64)], sigma: f64, eps: f64) -> pathcalc_core::Result<f64> {
    let mut total = 0.0;
    for &(level, w) in weights {
        total += w * sigma * sigma * local_time_oracle(path, level, eps)?;
    }
    Ok(total)
}

fn decomposer(cfg: &ExperimentConfig, f: &ScalarFn) -> Result<Decomposer> {
    let d = match cfg.kind {
        ExperimentKind::Tanaka => Decomposer::tanaka(f, cfg.range())?,
        _ => Decomposer::ito(f, cfg.range())?,
    };
    Ok(match cfg.negative_control {
        Some(NegativeControl::FlippedIntegrand) => {
            let g = d.integrand().clone();
            let flipped = ScalarFn::new(format!("-({})", g.label()), move |x| -g.eval(x));
            d.with_integrand(flipped)
        }
        _ => d,
    })
}

/// One row per (function, path, level). Tanaka runs add the occupation
/// oracle of the final residual where the function has a closed form for it.
pub fn simulate(cfg: &ExperimentConfig, seed: u64) -> Result<Table> {
    let tanaka = cfg.kind == ExperimentKind::Tanaka;
    let bracket = BracketModel::from_model(&cfg.model);
    let mut header: Vec<String> = HEADER.iter().map(|s| s.to_string()).collect();
    if tanaka {
        header.push("oracle".into());
        header.push("max_cell_increment".into());
    }
    let mut table = Table::with_header(header);

    for (fi, spec) in cfg.functions.iter().enumerate() {
        let f = spec.build()?;
        let d = decomposer(cfg, &f)?;
        let weights = if tanaka { kink_weights(spec) } else { None };
        let rows = try_par_map(cfg.n_paths, |i| -> pathcalc_core::Result<Vec<Vec<String>>> {
            let p = simulate_path(&cfg.model, cfg.n_steps(), cfg.horizon, derive_seed(seed, i as u64))?;
            let expected = match &weights {
                Some(w) => oracle(&p, w, cfg.model.sigma(), cfg.tolerances.oracle_eps)?,
                None => f64::NAN,
            };
            let mut out = Vec::with_capacity(cfg.levels.len());
            for &level in &cfg.levels {
                let r = d.decompose(&p, &riemann_grid(&p, GridScheme::Dyadic { level })?, &bracket)?;
                let mut row = vec![
                    fi.to_string(),
                    f.label().to_string(),
                    i.to_string(),
                    level.to_string(),
                    num(r.mesh),
                    num(r.final_lhs()),
                    num(r.final_stochastic_integral()),
                    num(r.final_compensator()),
                    num(r.final_bracket_compensator()),
                    num(r.final_jump_term()),
                    num(r.final_residual()),
                    num(r.residual[0]),
                    num(r.max_abs_residual()),
                    num(r.max_abs_identity_gap()),
                    num(r.bracket_defect()),
                    num(r.min_residual_increment()),
                    num(r.max_residual_jump()),
                ];
                if tanaka {
                    row.push(num(expected));
                    row.push(num(r.max_cell_increment()));
                }
                out.push(row);
            }
            Ok(out)
        })
        .map_err(|e| CliError::config(format!("{}: {e}", f.label())))?;
        rows.into_iter().flatten().for_each(|r| table.push(r));
    }
    Ok(table)
}

/// Rows of function `fi` at its finest level, plus its coarsest-level rows.
fn levels_of(table: &Table, fi: usize) -> Result<(Table, Table, u32, u32)> {
    let rows = table.select("fn_index", &fi.to_string())?;
    let levels = rows.nums("level")?;
    if levels.is_empty() {
        return Err(CliError::Table(format!("no rows for function {fi}")));
    }
    let (lo, hi) = (min(&levels) as u32, max(&levels) as u32);
    Ok((rows.select("level", &hi.to_string())?, rows.select("level", &lo.to_string())?, lo, hi))
}

fn label_of(table: &Table, fallback: &str) -> String {
    table.texts("function").ok().and_then(|t| t.first().map(|s| s.to_string())).unwrap_or_else(|| fallback.to_string())
}

/// Mean `|bracket_defect|` (realized against closed-form bracket) does not grow from the coarsest to the finest level.
fn defect_check(pfx: &str, fine: &Table, coarse: &Table, lo: u32, hi: u32) -> Result<Check> {
    let abs_mean = |t: &Table| -> Result<f64> { Ok(mean(&t.nums("bracket_defect")?.iter().map(|x| x.abs()).collect::<Vec<_>>())) };
    let (c, f) = (abs_mean(coarse)?, abs_mean(fine)?);
    Ok(Check::new(format!("{pfx}mean bracket defect L{lo} {} → L{hi} {}", sci(c), sci(f)), f, f <= c))
}

pub fn evaluate_ito(cfg: &ExperimentConfig, table: &Table) -> Result<Vec<Check>> {
    let tol = cfg.tolerances.exact;
    let mut checks = Vec::new();
    for fi in 0..cfg.functions.len() {
        let (fine, coarse, lo, hi) = levels_of(table, fi)?;
        let pfx = prefix(cfg, &label_of(&fine, "?"));
        let final_abs: Vec<f64> = fine.nums("residual")?.iter().map(|x| x.abs()).collect();
        let res = max(&final_abs).max(max(&fine.nums("max_abs_residual")?));
        checks.push(Check::at_most(format!("{pfx}max residual {}", sci(res)), res, tol));
        let gap = max(&fine.nums("max_abs_identity_gap")?);
        checks.push(Check::at_most(format!("{pfx}max identity gap {}", sci(gap)), gap, tol));
        if lo < hi {
            checks.push(defect_check(&pfx, &fine, &coarse, lo, hi)?);
        }
    }
    Ok(checks)
}

pub fn evaluate_tanaka(cfg: &ExperimentConfig, table: &Table) -> Result<Vec<Check>> {
    let tol = &cfg.tolerances;
    let mut checks = Vec::new();
    for fi in 0..cfg.functions.len() {
        let (fine, coarse, lo, hi) = levels_of(table, fi)?;
        let pfx = prefix(cfg, &label_of(&fine, "?"));
        let start = max(&fine.nums("residual_start")?.iter().map(|x| x.abs()).collect::<Vec<_>>());
        checks.push(Check::at_most(format!("{pfx}A^c starts at 0 (max |A^c_0| {})", sci(start)), start, tol.exact));
        let inc = min(&fine.nums("min_residual_increment")?);
        checks.push(Check::at_least(format!("{pfx}min A^c increment {} ≥ -{}", sci(inc), sci(tol.exact)), inc, -tol.exact));
        let jump = max(&fine.nums("max_residual_jump")?);
        checks.push(Check::at_most(format!("{pfx}max A^c jump {} ≤ {}", sci(jump), sci(tol.jump)), jump, tol.jump));

        let expected = fine.nums("oracle")?;
        if expected.iter().all(|x| !x.is_nan()) {
            let got = fine.nums("residual")?;
            let err: f64 = got.iter().zip(&expected).map(|(a, b)| (a - b).abs()).sum();
            let scale: f64 = expected.iter().map(|x| x.abs()).sum();
            if scale > 0.0 {
                let rel = err / scale;
                checks.push(Check::at_most(
                    format!("{pfx}A^c vs occupation oracle (ε={}): relative L1 error {rel:.4} ≤ {}", short(tol.oracle_eps), short(tol.tanaka_rel)),
                    rel,
                    tol.tanaka_rel,
                ));
            } else {
                let worst = max(&got.iter().map(|x| x.abs()).collect::<Vec<_>>());
                checks.push(Check::at_most(format!("{pfx}A^c vanishes where the oracle does: max |A^c| {}", sci(worst)), worst, tol.exact));
            }
        }
        if lo < hi {
            let (c, f) = (mean(&coarse.nums("max_cell_increment")?), mean(&fine.nums("max_cell_increment")?));
            checks.push(Check::new(format!("{pfx}mean largest A^c cell step L{lo} {} → L{hi} {}", sci(c), sci(f)), f, f <= c));
            checks.push(defect_check(&pfx, &fine, &coarse, lo, hi)?);
        }
    }
    Ok(checks)
}
