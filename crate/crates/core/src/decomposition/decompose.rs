use std::sync::Arc;

use super::bracket::BracketModel;
use super::report::{DecompositionMode, DecompositionReport};
use crate::error::{Error, Result};
use crate::functional::{approx_derivative, default_schedule, lipschitz_scan, RealFn, ScalarFn, ScanReport, TwoIndexFn};
use crate::path::SamplePath;
use crate::riemann::{grid_nodes, RiemannGrid};

const SCAN_H_MAX: f64 = 0.25;
const SCAN_DENSITY: f64 = 64.0;
const CHECK_POINTS: usize = 33;
const SCHEDULE_LEN: usize = 16;
const DERIVATIVE_RTOL: f64 = 1e-5;

/// A function together with the derivative data its decomposition needs,
/// checked once on a range of values.
///
/// `g` is the right derivative of `f` (declared, or extrapolated from
/// incremental ratios) and the curvature `c = D_+^2 f / 2` weighs the
/// continuous bracket.
#[derive(Clone)]
pub struct Decomposer {
    f: ScalarFn,
    g: ScalarFn,
    curvature: RealFn,
    mode: DecompositionMode,
    range: (f64, f64),
    scans: Vec<ScanReport>,
}

impl std::fmt::Debug for Decomposer {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt.debug_struct("Decomposer")
            .field("f", &self.f.label())
            .field("g", &self.g.label())
            .field("mode", &self.mode)
            .field("range", &self.range)
            .finish()
    }
}

impl Decomposer {
    /// Requires bounded first and second incremental ratios on `range`.
    pub fn ito(f: &ScalarFn, range: (f64, f64)) -> Result<Self> {
        Self::build(f, range, DecompositionMode::Ito)
    }

    /// Requires bounded first and lower-bounded second incremental ratios on
    /// `range`, which every convex function satisfies.
    pub fn tanaka(f: &ScalarFn, range: (f64, f64)) -> Result<Self> {
        Self::build(f, range, DecompositionMode::Tanaka)
    }

    fn build(f: &ScalarFn, range: (f64, f64), mode: DecompositionMode) -> Result<Self> {
        let hat = TwoIndexFn::hat(f);
        let first = lipschitz_scan(&hat, 1, range, SCAN_H_MAX, SCAN_DENSITY)?;
        if !first.bounded {
            return Err(Error::NotApplicable(format!("{} is not Lipschitz on [{}, {}]", f.label(), range.0, range.1)));
        }
        let second = lipschitz_scan(&hat, 2, range, SCAN_H_MAX, SCAN_DENSITY)?;
        let ok = match mode {
            DecompositionMode::Ito => second.bounded,
            DecompositionMode::Tanaka => second.lower_bounded,
        };
        if !ok {
            let what = if mode == DecompositionMode::Ito { "bounded" } else { "bounded below" };
            return Err(Error::NotApplicable(format!(
                "second incremental ratios of {} are not {what} on [{}, {}]",
                f.label(),
                range.0,
                range.1
            )));
        }
        let g = derivative_on(f, range)?;
        let curvature: RealFn = match f.derivative(2) {
            Some(d2) => Arc::new(move |x| 0.5 * d2(x)),
            None => {
                let f = f.clone();
                Arc::new(move |x| {
                    approx_derivative(&f, 2, x, &default_schedule(SCHEDULE_LEN))
                        .ok()
                        .filter(|e| e.exists)
                        .map_or(0.0, |e| 0.5 * e.value)
                })
            }
        };
        Ok(Decomposer { f: f.clone(), g, curvature, mode, range, scans: vec![first, second] })
    }

    /// Replaces the integrand `g` without any check. Used for negative controls.
    pub fn with_integrand(mut self, g: ScalarFn) -> Self {
        self.g = g;
        self
    }

    pub fn mode(&self) -> DecompositionMode {
        self.mode
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn integrand(&self) -> &ScalarFn {
        &self.g
    }

    /// The incremental-ratio scans the hypotheses were checked with.
    pub fn scans(&self) -> &[ScanReport] {
        &self.scans
    }

    pub fn curvature(&self, x: f64) -> f64 {
        (self.curvature)(x)
    }

    /// Decomposes `f(X)` along `grid`.
    pub fn decompose(&self, path: &SamplePath, grid: &RiemannGrid, bracket: &BracketModel) -> Result<DecompositionReport> {
        let (lo, hi) = path_range(path);
        if lo < self.range.0 || hi > self.range.1 {
            return Err(Error::NotApplicable(format!(
                "path visits [{lo}, {hi}], outside the checked range [{}, {}]",
                self.range.0, self.range.1
            )));
        }
        let nodes = grid_nodes(path, grid, true, None)?;
        let f = |x: f64| self.f.eval(x);
        let g = |x: f64| self.g.eval(x);
        let f0 = f(nodes[0].value);

        let n = grid.len();
        let mut r = DecompositionReport {
            seed: path.seed(),
            model: path.model().map(|m| m.label()),
            f_label: self.f.label().to_string(),
            g_label: self.g.label().to_string(),
            mode: self.mode,
            grid: grid.scheme(),
            mesh: grid.mesh(),
            times: Vec::with_capacity(n),
            lhs: Vec::with_capacity(n),
            stochastic_integral: Vec::with_capacity(n),
            compensator_term: Vec::with_capacity(n),
            bracket_compensator: Vec::with_capacity(n),
            jump_term: Vec::with_capacity(n),
            residual: Vec::with_capacity(n),
            identity_gap: Vec::with_capacity(n),
            jump_positions: Vec::new(),
            residual_jumps: Vec::new(),
        };
        let (mut si, mut comp, mut bcomp, mut jump, mut residual) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for k in 0..nodes.len() {
            let v = nodes[k];
            if k > 0 {
                let u = nodes[k - 1];
                let (fu, fv, gu) = (f(u.value), f(v.value), g(u.value));
                let d = v.value - u.value;
                let step = gu * d;
                si += step;
                if v.closes_jump {
                    let before = residual;
                    jump += fv - fu - step;
                    r.jump_positions.push(r.times.len());
                    r.residual_jumps.push(residual - before);
                } else {
                    let c = self.curvature(u.value);
                    comp += c * d * d;
                    bcomp += c * (bracket.continuous(v.time) - bracket.continuous(u.time));
                    residual += (fv - fu - step) - c * d * d;
                }
            }
            let is_pre_jump = k + 1 < nodes.len() && nodes[k + 1].closes_jump;
            if !is_pre_jump {
                let lhs = f(v.value) - f0;
                r.times.push(v.time);
                r.lhs.push(lhs);
                r.stochastic_integral.push(si);
                r.compensator_term.push(comp);
                r.bracket_compensator.push(bcomp);
                r.jump_term.push(jump);
                r.residual.push(residual);
                r.identity_gap.push(lhs - si - comp - jump - residual);
            }
        }
        Ok(r)
    }

    /// Decomposition of the path stopped at `sigma`: the grid is cut at
    /// `sigma` and closed by the path index of `sigma`.
    pub fn decompose_stopped(&self, path: &SamplePath, grid: &RiemannGrid, bracket: &BracketModel, sigma: f64) -> Result<DecompositionReport> {
        self.decompose(path, &grid.truncated(path, sigma)?, bracket)
    }
}

/// Smallest and largest value the path takes, left limits included.
pub fn path_range(path: &SamplePath) -> (f64, f64) {
    path.values().iter().chain(path.pre_values()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Range a decomposition of `path` is checked on: the visited values padded
/// by one on each side and rounded out to integers.
pub fn padded_range(path: &SamplePath) -> (f64, f64) {
    let (lo, hi) = path_range(path);
    ((lo - 1.0).floor(), (hi + 1.0).ceil())
}

/// The right derivative of `f` on `range`: the declared one after checking it
/// against extrapolated incremental ratios, else the extrapolation itself.
fn derivative_on(f: &ScalarFn, range: (f64, f64)) -> Result<ScalarFn> {
    let schedule = default_schedule(SCHEDULE_LEN);
    let declared = f.derivative_fn(1);
    for i in 0..CHECK_POINTS {
        let x = range.0 + (range.1 - range.0) * (i as f64 / (CHECK_POINTS - 1) as f64);
        let est = approx_derivative(f, 1, x, &schedule)?;
        match &declared {
            Some(g) if est.exists => {
                let (gv, ev) = (g.eval(x), est.value);
                if !((gv - ev).abs() <= DERIVATIVE_RTOL * gv.abs().max(1.0)) {
                    return Err(Error::invalid(format!("declared derivative of {} is {gv} at {x}, incremental ratios give {ev}", f.label())));
                }
            }
            Some(_) => {}
            None if !est.exists => {
                return Err(Error::NotApplicable(format!("{} has no approximate first derivative at {x}", f.label())));
            }
            None => {}
        }
    }
    Ok(match declared {
        Some(g) => g,
        None => {
            let f = f.clone();
            let label = format!("D+({})", f.label());
            ScalarFn::new(label, move |x| approx_derivative(&f, 1, x, &schedule).map_or(f64::NAN, |e| e.value))
        }
    })
}

/// `int_0^t g(X_{s-}) dX_s` as left-point sums cumulated along `grid`, one
/// entry per grid point; jumps are integrated against `g(X_{s-})`.
pub fn stochastic_integral(path: &SamplePath, g: &ScalarFn, grid: &RiemannGrid) -> Result<Vec<f64>> {
    let nodes = grid_nodes(path, grid, true, None)?;
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    for k in 0..nodes.len() {
        if k > 0 {
            acc += g.eval(nodes[k - 1].value) * (nodes[k].value - nodes[k - 1].value);
        }
        if !(k + 1 < nodes.len() && nodes[k + 1].closes_jump) {
            out.push(acc);
        }
    }
    Ok(out)
}

/// Itô-class decomposition with the hypotheses checked on the padded path range.
pub fn ito_decompose(path: &SamplePath, f: &ScalarFn, grid: &RiemannGrid, bracket: &BracketModel) -> Result<DecompositionReport> {
    Decomposer::ito(f, padded_range(path))?.decompose(path, grid, bracket)
}

/// Tanaka-class decomposition with the hypotheses checked on the padded path range.
pub fn tanaka_decompose(path: &SamplePath, f: &ScalarFn, grid: &RiemannGrid, bracket: &BracketModel) -> Result<DecompositionReport> {
    Decomposer::tanaka(f, padded_range(path))?.decompose(path, grid, bracket)
}
