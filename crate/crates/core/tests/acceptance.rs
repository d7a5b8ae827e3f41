//! Acceptance suite: nine criteria at their stated tolerances, one PASS/FAIL
//! line each. Runs without the libtest harness so the lines always print.

use std::time::{Duration, Instant};

use rand::Rng;

use pathcalc_core::compensator::{
    catalog_pairs, martingale_check, martingale_check_with, verify_compensator, verify_compensator_with, CompensatorSetup,
    IncreasingProcessModel, LinearCompensator,
};
use pathcalc_core::decomposition::{local_time_oracle, BracketModel, Decomposer};
use pathcalc_core::functional::{
    partition_sum, summability_limit, taylor_check, FnSpec, Partition, RefinementScheme, ScalarFn, TaylorOptions, TwoIndexFn,
};
use pathcalc_core::mc::par_map;
use pathcalc_core::path::{realized_qv, simulate, JumpLaw, PathModel, SamplePath};
use pathcalc_core::riemann::{grid_nodes, limit_in_probability, riemann_grid, ConvergenceSetup, FunctionalTemplate, GridScheme, SchemeLadder};
use pathcalc_core::rng::{derive_seed, path_rng};
use pathcalc_core::stats::{mean, MeanEstimate};

const EPS: f64 = f64::EPSILON;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn dyadic(p: &SamplePath, level: u32) -> pathcalc_core::riemann::RiemannGrid {
    riemann_grid(p, GridScheme::Dyadic { level }).expect("dyadic grid")
}

fn jump_diffusion() -> PathModel {
    PathModel::JumpDiffusion { sigma: 0.8, drift: 0.1, rate: 5.0, jump_law: JumpLaw::Normal { mean: 0.0, std: 0.5 }, start: 0.2 }
}

fn random_knots(seed: u64) -> PathModel {
    let mut rng = path_rng(seed);
    let mut knots = vec![(0.0, rng.random_range(-1.0..1.0))];
    for k in 1..=4 {
        knots.push((k as f64 * 0.25, rng.random_range(-2.0..2.0)));
    }
    PathModel::FiniteVariation { knots }
}

/// Seed-indexed path model.
type ModelOf = fn(u64) -> PathModel;

fn exact_ito_identity() -> Outcome {
    let f = FnSpec::Square.build().unwrap();
    let d = Decomposer::ito(&f, (-16.0, 16.0)).unwrap();
    let mut worst_residual = 0.0f64;
    let mut worst_gap = 0.0f64;
    let mut failures = Vec::new();
    let models: [(&str, ModelOf); 3] = [("bm", |_| PathModel::standard_brownian()), ("jd", |_| jump_diffusion()), ("fv", random_knots)];
    for (name, model_of) in models {
        let per_path = par_map(100, |i| {
            let seed = derive_seed(1, i as u64);
            let model = model_of(seed);
            let p = simulate(&model, 1 << 12, 1.0, seed)?;
            let r = d.decompose(&p, &dyadic(&p, 12), &BracketModel::from_model(&model))?;
            Ok::<_, pathcalc_core::Error>((r.max_abs_residual(), r.max_abs_identity_gap()))
        });
        for (i, r) in per_path.into_iter().enumerate() {
            match r {
                Ok((res, gap)) => {
                    worst_residual = worst_residual.max(res);
                    worst_gap = worst_gap.max(gap);
                }
                Err(e) => failures.push(format!("{name} path {i}: {e}")),
            }
        }
    }
    let pass = failures.is_empty() && worst_residual <= 1e-10 && worst_gap <= 1e-10;
    outcome(pass, format!("max |residual| {worst_residual:.3e}, max |identity gap| {worst_gap:.3e} over 300 paths; errors {failures:?}"))
}

fn catalog_fn(rng: &mut impl Rng) -> ScalarFn {
    let specs = [
        FnSpec::Identity,
        FnSpec::Abs,
        FnSpec::NegAbs,
        FnSpec::Square,
        FnSpec::Cube,
        FnSpec::Quartic,
        FnSpec::XAbsXHalf,
        FnSpec::Sign,
        FnSpec::NegSign,
        FnSpec::SignPrimitive { shift: 0.3 },
        FnSpec::PiecewiseLinear { breakpoints: vec![-1.0, 0.5], slopes: vec![-2.0, 0.5, 3.0], value_at_zero: 0.1 },
        FnSpec::Polynomial { coeffs: vec![0.5, -1.0, 0.25, 2.0] },
        FnSpec::Cos,
        FnSpec::Sin,
        FnSpec::XSinInvX,
    ];
    specs[rng.random_range(0..specs.len())].build().unwrap()
}

fn telescoping_and_additivity() -> Outcome {
    let mut rng = path_rng(2);
    let mut bit_exact = 0usize;
    let mut worst_excess = 0.0f64;
    let mut violations = 0usize;
    for _ in 0..10_000 {
        let f = catalog_fn(&mut rng);
        let a = rng.random_range(-3.0..2.0);
        let b = a + rng.random_range(0.01..3.0);
        let n = rng.random_range(0..60);
        let points: Vec<f64> = (0..n).map(|_| rng.random_range(a..b)).filter(|x| *x > a && *x < b).collect();
        let pi = Partition::new(a, b, points).unwrap();
        let s = partition_sum(&TwoIndexFn::hat(&f), &pi);
        let expect = f.eval(b) - f.eval(a);
        // each rounded difference and each addition contributes at most half an ulp
        let nodes = pi.nodes();
        let bound: f64 = nodes.windows(2).map(|w| EPS * (f.eval(w[0]).abs() + f.eval(w[1]).abs())).sum::<f64>() + EPS * expect.abs();
        if s == expect {
            bit_exact += 1;
        }
        let err = (s - expect).abs();
        if err > bound {
            violations += 1;
            worst_excess = worst_excess.max(err - bound);
        }
    }

    let tol = 1e-4;
    // (b - a)^2 2^-level must settle below tol over the last levels
    let scheme = RefinementScheme::Dyadic { max_level: 18 };
    let g = |s: FnSpec| s.build().unwrap();
    let functionals = [
        TwoIndexFn::hat(&g(FnSpec::Cube)),
        TwoIndexFn::quadratic(),
        TwoIndexFn::star(&g(FnSpec::XAbsXHalf), &g(FnSpec::Abs)),
        TwoIndexFn::star(&g(FnSpec::Square), &g(FnSpec::Square).derivative_fn(1).unwrap()),
        TwoIndexFn::weighted_hat(&g(FnSpec::Cos), &g(FnSpec::Square)),
    ];
    let mut worst_additivity = 0.0f64;
    let mut unsettled = Vec::new();
    for f in &functionals {
        for (a, c, b) in [(-1.0, 0.25, 1.0), (0.0, 0.5, 2.0), (-2.0, -0.75, 0.5)] {
            let whole = summability_limit(f, a, b, &scheme, tol).unwrap();
            let left = summability_limit(f, a, c, &scheme, tol).unwrap();
            let right = summability_limit(f, c, b, &scheme, tol).unwrap();
            let gap = (left.estimate + right.estimate - whole.estimate).abs();
            worst_additivity = worst_additivity.max(gap);
            if !(whole.converged && left.converged && right.converged && gap <= 2.0 * tol) {
                unsettled.push(format!("{} on ({a}, {c}, {b})", f.label()));
            }
        }
    }
    outcome(
        violations == 0 && unsettled.is_empty(),
        format!(
            "telescoping: {bit_exact}/10000 bit-exact, {violations} beyond the summation rounding bound (worst excess {worst_excess:.1e}); \
             additivity worst |I(a,c)+I(c,b)-I(a,b)| {worst_additivity:.2e} vs 2 tol {:.0e}; unsettled {unsettled:?}",
            2.0 * tol
        ),
    )
}

fn brownian_qv() -> Outcome {
    let levels: Vec<u32> = (8..=14).collect();
    let per_path: Vec<Vec<f64>> = par_map(1000, |i| {
        let p = simulate(&PathModel::standard_brownian(), 1 << 14, 1.0, derive_seed(3, i as u64)).unwrap();
        levels.iter().map(|&l| realized_qv(&p, &dyadic(&p, l))).collect()
    });
    let at = |k: usize| per_path.iter().map(|v| v[k]).collect::<Vec<f64>>();
    let qv12 = MeanEstimate::from_samples(&at(4));
    let steps: Vec<f64> = (0..levels.len() - 1).map(|k| mean(&per_path.iter().map(|v| (v[k + 1] - v[k]).abs()).collect::<Vec<_>>())).collect();
    let cauchy = steps.windows(2).all(|w| w[1] <= w[0]) && *steps.last().unwrap() < 0.02;
    let in_band = (0.95..=1.05).contains(&qv12.mean);
    outcome(
        in_band && cauchy,
        format!(
            "E[QV_1] at level 12 = {:.4} (se {:.4}); mean |QV_(l+1) - QV_l| for l=8..13: {}",
            qv12.mean,
            qv12.std_err,
            steps.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn generalized_ito() -> Outcome {
    let f = FnSpec::XAbsXHalf.build().unwrap();
    let d = Decomposer::ito(&f, (-8.0, 8.0)).unwrap();
    let b = BracketModel::from_model(&PathModel::standard_brownian());
    let n = 1usize << 14;
    let rows: Vec<(f64, f64)> = par_map(500, |i| {
        let p = simulate(&PathModel::standard_brownian(), n, 1.0, derive_seed(4, i as u64)).unwrap();
        let r = d.decompose(&p, &dyadic(&p, 14), &b).unwrap();
        // oracle: left-point time quadrature of sign(B) along the path
        let (t, x) = (p.times(), p.values());
        let quad: f64 = (1..x.len()).map(|k| 0.5 * pathcalc_core::functional::sign(x[k - 1]) * (t[k] - t[k - 1])).sum();
        let direct = (f.eval(x[n]) - f.eval(x[0]) - r.final_stochastic_integral() - quad).abs();
        (direct, r.final_residual().abs())
    });
    let err = mean(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let res = mean(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let worst = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    outcome(err < 0.05, format!("mean |f(B_1) - f(B_0) - int|B|dB - 1/2 int sign(B)ds| = {err:.4e} (max {worst:.3e}); mean |residual_1| = {res:.4e}"))
}

fn generalized_tanaka() -> Outcome {
    let f = FnSpec::Abs.build().unwrap();
    let d = Decomposer::tanaka(&f, (-8.0, 8.0)).unwrap();
    let model = PathModel::standard_brownian();
    let b = BracketModel::from_model(&model);
    let sigma2 = b.continuous_rate;
    let rows: Vec<(f64, f64, f64, f64, f64)> = par_map(300, |i| {
        let p = simulate(&model, 1 << 16, 1.0, derive_seed(5, i as u64)).unwrap();
        let r = d.decompose(&p, &dyadic(&p, 16), &b).unwrap();
        let oracle = sigma2 * local_time_oracle(&p, 0.0, 0.01).unwrap();
        (r.final_residual(), oracle, r.min_residual_increment(), r.max_residual_jump(), r.max_cell_increment())
    });
    let a: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let o: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let abs_err: f64 = a.iter().zip(&o).map(|(x, y)| (x - y).abs()).sum();
    let aggregate = abs_err / o.iter().sum::<f64>();
    let per_path: Vec<f64> = a.iter().zip(&o).filter(|(_, y)| **y > 0.0).map(|(x, y)| (x - y).abs() / y).collect();
    let min_inc = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let max_jump = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    let max_cell = rows.iter().map(|r| r.4).fold(0.0, f64::max);
    let oracle_mean = MeanEstimate::from_samples(&o);
    let target = (2.0 / std::f64::consts::PI).sqrt();
    let pass = aggregate < 0.10 && min_inc >= -1e-6 && max_jump <= 1e-3 && oracle_mean.within(target, 3.0);
    outcome(
        pass,
        format!(
            "relative error sum|A-O|/sum O = {aggregate:.4} (per-path mean {:.4}, median {:.4}); min increment {min_inc:.2e}; \
             max jump {max_jump:.2e} (max cell step {max_cell:.2e}); E[oracle] = {:.4} +- {:.4} vs {target:.4}",
            mean(&per_path),
            median(&per_path),
            oracle_mean.mean,
            oracle_mean.std_err
        ),
    )
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn riemann_independence() -> Outcome {
    let setup = ConvergenceSetup { model: PathModel::standard_brownian(), n_steps: 1 << 16, horizon: 1.0, n_paths: 500, seed: 6, eps: 0.05, delta: 0.05 };
    let ladders = [SchemeLadder::dyadic([10, 12, 14]), SchemeLadder::hitting([2f64.powi(-5), 2f64.powi(-6), 2f64.powi(-7)])];
    let d = limit_in_probability(&FunctionalTemplate::new(TwoIndexFn::quadratic()), &setup, &ladders).unwrap();
    let agreement = 1.0 - d.cross_tail_probs[0];
    let means: Vec<f64> = d.schemes.iter().map(|s| mean(s.estimates.last().unwrap())).collect();
    outcome(
        agreement >= 0.95 && d.notes.is_empty(),
        format!(
            "agreement within 0.05 at dyadic(14) vs hitting(2^-7): {agreement:.3}; finest means {means:?}; per-scheme tails {:?}; notes {:?}",
            d.schemes.iter().map(|s| s.tail_probs.clone()).collect::<Vec<_>>(),
            d.notes
        ),
    )
}

fn compensator_contract() -> Outcome {
    let setup = CompensatorSetup { n_paths: 10_000, horizon: 1.0, seed: 7, n_steps: 1024 };
    let mut failed = Vec::new();
    let mut worst_z = 0.0f64;
    let pairs = catalog_pairs();
    for (m, y) in &pairs {
        let v = verify_compensator(m, y, &setup).unwrap();
        if v.combined_se > 0.0 {
            worst_z = worst_z.max(v.difference.abs() / v.combined_se);
        }
        if !v.pass {
            failed.push(format!("{} x {}: diff {:.3e}, se {:.3e}", v.model, v.test_process, v.difference, v.combined_se));
        }
    }
    let counting = IncreasingProcessModel::PoissonCounting { rate: 3.0 };
    let wrong = verify_compensator_with(&counting, &pathcalc_core::TestProcess::Constant { value: 1.0 }, &setup, LinearCompensator { rate: 3.5 }).unwrap();
    let unit = IncreasingProcessModel::PoissonCounting { rate: 1.0 };
    let mart = martingale_check(&unit, &setup, &[0.0, 0.5, 1.0]).unwrap();
    let mart_wrong = martingale_check_with(&unit, &setup, &[0.0, 0.5, 1.0], LinearCompensator { rate: 1.5 }).unwrap();
    let pass = failed.is_empty() && !wrong.pass && mart.pass && !mart_wrong.pass;
    outcome(
        pass,
        format!(
            "{}/{} pairs within 3 SE (largest |diff|/se {worst_z:.2}); wrong intensity 3.5 vs 3: diff {:.3} ({}); martingale increments {}; wrong martingale {}; failures {failed:?}",
            pairs.len() - failed.len(),
            pairs.len(),
            wrong.difference,
            if wrong.pass { "not detected" } else { "detected" },
            if mart.pass { "pass" } else { "fail" },
            if mart_wrong.pass { "not detected" } else { "detected" },
        ),
    )
}

fn taylor_exactness() -> Outcome {
    let opts = TaylorOptions::default();
    let polys: [&[f64]; 6] = [&[1.0, 2.0], &[0.5, -1.0, 3.0], &[0.0, 0.0, 0.0, 1.0], &[1.0, -2.0, 0.5, 0.25], &[0.0, 0.0, 0.0, 0.0, 1.0], &[2.0, 1.0, -1.0, 0.5, -0.75]];
    let mut worst_gap = 0.0f64;
    let mut all = true;
    for coeffs in polys {
        let degree = coeffs.len() - 1;
        let f = FnSpec::Polynomial { coeffs: coeffs.to_vec() }.build().unwrap();
        for (a, b) in [(0.0, 1.0), (-1.0, 0.5)] {
            let r = taylor_check(&TwoIndexFn::hat(&f), a, b, degree, &opts).unwrap();
            worst_gap = worst_gap.max(r.identity_gap);
            all &= r.success && r.identity_gap < 1e-10;
        }
    }
    let kink = taylor_check(&TwoIndexFn::hat(&FnSpec::XAbsXHalf.build().unwrap()), 0.0, 1.0, 2, &opts).unwrap();
    outcome(
        all && kink.within_bound,
        format!(
            "polynomial degrees 1-4: max identity gap {worst_gap:.2e}; x|x|/2 on (0,1): remainder {:.6} <= bound {:.6}: {}",
            kink.remainder, kink.remainder_bound, kink.within_bound
        ),
    )
}

fn convexity_positivity() -> Outcome {
    let specs = [
        FnSpec::Identity,
        FnSpec::Abs,
        FnSpec::Square,
        FnSpec::Quartic,
        FnSpec::SignPrimitive { shift: 0.3 },
        FnSpec::PiecewiseLinear { breakpoints: vec![-1.0, 0.5], slopes: vec![-2.0, 0.5, 3.0], value_at_zero: 0.1 },
    ];
    let mut rng = path_rng(9);
    let mut negatives = Vec::new();
    let mut raw_min = f64::INFINITY;
    for spec in specs.iter().filter(|s| s.is_convex()) {
        let f = spec.build().unwrap();
        let g = f.derivative_fn(1).unwrap();
        let star = TwoIndexFn::star(&f, &g);
        let mut bad = 0;
        for _ in 0..10_000 {
            let (x, y) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let v = star.eval(x, y);
            raw_min = raw_min.min(v);
            if v < -rounding(&f, &g, x, y) {
                bad += 1;
            }
        }
        if bad > 0 {
            negatives.push(format!("{spec:?}: {bad}"));
        }
    }

    // |T_X(f*g)| <= 1/2 for f = x|x|/2, g = |x| on BM pairs at every dyadic level
    let f = FnSpec::XAbsXHalf.build().unwrap();
    let g = FnSpec::Abs.build().unwrap();
    let star = TwoIndexFn::star(&f, &g);
    let k = 0.5;
    let mut pairs = 0usize;
    let mut over = 0usize;
    let mut raw_max = 0.0f64;
    for seed in 0..20 {
        let p = simulate(&PathModel::standard_brownian(), 1 << 12, 1.0, derive_seed(10, seed)).unwrap();
        for level in 0..=12 {
            let nodes = grid_nodes(&p, &dyadic(&p, level), false, None).unwrap();
            for w in nodes.windows(2) {
                let (x, y) = (w[0].value, w[1].value);
                if x == y {
                    continue;
                }
                let t = star.eval(x, y) / ((y - x) * (y - x));
                raw_max = raw_max.max(t.abs());
                pairs += 1;
                if t.abs() > k + rounding(&f, &g, x, y) / ((y - x) * (y - x)) {
                    over += 1;
                }
            }
        }
    }
    outcome(
        negatives.is_empty() && over == 0,
        format!(
            "Star(f, D+f) >= 0 on 10^4 pairs for {} convex functions (raw min {raw_min:.2e}, beyond rounding: {negatives:?}); \
             |T_X(f*g)| <= 1/2 on {pairs} path pairs: {over} violations (raw max {raw_max:.7})",
            specs.iter().filter(|s| s.is_convex()).count()
        ),
    )
}

/// Forward rounding bound of `f(y) - f(x) - g(x)(y - x)`.
fn rounding(f: &ScalarFn, g: &ScalarFn, x: f64, y: f64) -> f64 {
    4.0 * EPS * (f.eval(x).abs() + f.eval(y).abs() + (g.eval(x) * (y - x)).abs())
}

/// Name, check, runtime budget.
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn main() {
    pathcalc_core::mc::init_threads_from_env();
    let criteria: [Criterion; 9] = [
        ("1 exact Ito identity for x^2", exact_ito_identity, Some(Duration::from_secs(10))),
        ("2 telescoping and additivity", telescoping_and_additivity, Some(Duration::from_secs(5))),
        ("3 quadratic variation of BM", brownian_qv, Some(Duration::from_secs(30))),
        ("4 generalized Ito for x|x|/2", generalized_ito, Some(Duration::from_secs(120))),
        ("5 generalized Tanaka for |x|", generalized_tanaka, Some(Duration::from_secs(300))),
        ("6 Riemann-sequence independence", riemann_independence, None),
        ("7 compensator contract", compensator_contract, None),
        ("8 Taylor exactness", taylor_exactness, None),
        ("9 convexity positivity", convexity_positivity, None),
    ];
    let mut failures = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = out.pass && in_time;
        if !pass {
            failures += 1;
        }
        let budget = limit.map_or(String::new(), |l| format!(" / {}s", l.as_secs()));
        println!("{} [{name}] ({:.2}s{budget}) {}", if pass { "PASS" } else { "FAIL" }, elapsed.as_secs_f64(), out.detail);
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
