//! Closed-form predictable compensators of increasing processes and Monte
//! Carlo checks that `E int Y dA = E int Y dA^p` for predictable `Y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{FnSpec, ScalarFn};
use crate::mc::try_par_map;
use crate::path::{poisson_events, simulate, JumpLaw, PathModel};
use crate::rng::{derive_seed, path_rng};
use crate::stats::MeanEstimate;

/// Increasing processes with a linear predictable compensator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IncreasingProcessModel {
    /// `N_t`, a Poisson process of intensity `rate`.
    PoissonCounting { rate: f64 },
    /// `sum_{k <= N_t} J_k` with nonnegative sizes.
    CompoundPoissonIncreasing { rate: f64, jump_law: JumpLaw },
    /// The realised quadratic variation `[X, X]` of a path model.
    PathQv { model: PathModel },
    /// `A_t = slope t`, its own compensator.
    Deterministic { slope: f64 },
}

impl IncreasingProcessModel {
    pub const KINDS: [&'static str; 4] = ["poisson_counting", "compound_poisson_increasing", "path_qv", "deterministic"];

    pub fn validate(&self) -> Result<()> {
        match self {
            IncreasingProcessModel::PoissonCounting { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::invalid("counting intensity must be positive"));
                }
            }
            IncreasingProcessModel::CompoundPoissonIncreasing { rate, jump_law } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::invalid("compound Poisson intensity must be positive"));
                }
                jump_law.validate()?;
                if !jump_law.is_nonnegative() {
                    return Err(Error::UnsupportedModel(format!("jump law {jump_law:?} is not supported on [0, inf)")));
                }
            }
            IncreasingProcessModel::PathQv { model } => {
                model.validate()?;
                if let PathModel::FiniteVariation { .. } = model {
                    return Err(Error::UnsupportedModel("quadratic variation of a finite-variation path is identically 0".into()));
                }
            }
            IncreasingProcessModel::Deterministic { slope } => {
                if !(slope.is_finite() && *slope >= 0.0) {
                    return Err(Error::invalid("deterministic slope must be finite and >= 0"));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            IncreasingProcessModel::PoissonCounting { rate } => format!("poisson(rate={rate})"),
            IncreasingProcessModel::CompoundPoissonIncreasing { rate, jump_law } => format!("cpp+(rate={rate}, {jump_law:?})"),
            IncreasingProcessModel::PathQv { model } => format!("qv[{}]", model.label()),
            IncreasingProcessModel::Deterministic { slope } => format!("deterministic(slope={slope})"),
        }
    }
}

/// `t -> rate t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCompensator {
    pub rate: f64,
}

impl LinearCompensator {
    pub fn eval(&self, t: f64) -> f64 {
        self.rate * t
    }
}

/// The predictable compensator of `model`.
///
/// Counting: `lambda t`. Compound: `lambda E[J] t`. Quadratic variation:
/// `<X>_t = sigma^2 t + lambda E[J^2] t`.
pub fn compensator_closed_form(model: &IncreasingProcessModel) -> Result<LinearCompensator> {
    model.validate()?;
    let rate = match model {
        IncreasingProcessModel::PoissonCounting { rate } => *rate,
        IncreasingProcessModel::CompoundPoissonIncreasing { rate, jump_law } => rate * jump_law.mean(),
        IncreasingProcessModel::PathQv { model } => {
            let s = model.sigma();
            s * s + model.jump_law().map_or(0.0, |l| model.jump_rate() * l.second_moment())
        }
        IncreasingProcessModel::Deterministic { slope } => *slope,
    };
    Ok(LinearCompensator { rate })
}

/// Left-continuous adapted integrands `Y_s`. `StateFunction` reads the
/// process left limit: `A_{s-}` for jump models, `X_{s-}` for `PathQv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestProcess {
    Constant { value: f64 },
    /// `1{s <= tau}`.
    Indicator { tau: f64 },
    /// `h(state_{s-})` with `h` bounded.
    StateFunction { h: FnSpec },
}

impl TestProcess {
    pub fn label(&self) -> String {
        match self {
            TestProcess::Constant { value } => format!("const({value})"),
            TestProcess::Indicator { tau } => format!("1{{t<={tau}}}"),
            TestProcess::StateFunction { h } => format!("h(state), h={h:?}"),
        }
    }

    fn bind(&self) -> Result<BoundProcess> {
        Ok(match self {
            TestProcess::Constant { value } => BoundProcess::Constant(*value),
            TestProcess::Indicator { tau } => BoundProcess::Indicator(*tau),
            TestProcess::StateFunction { h } => BoundProcess::State(h.build()?),
        })
    }
}

enum BoundProcess {
    Constant(f64),
    Indicator(f64),
    State(ScalarFn),
}

impl BoundProcess {
    fn eval(&self, t: f64, state: f64) -> f64 {
        match self {
            BoundProcess::Constant(v) => *v,
            BoundProcess::Indicator(tau) => {
                if t <= *tau {
                    1.0
                } else {
                    0.0
                }
            }
            BoundProcess::State(h) => h.eval(state),
        }
    }

    /// `int_s^t Y_u du` with the state held fixed.
    fn integrate(&self, s: f64, t: f64, state: f64) -> f64 {
        match self {
            BoundProcess::Constant(v) => v * (t - s),
            BoundProcess::Indicator(tau) => (t.min(*tau) - s).max(0.0),
            BoundProcess::State(h) => h.eval(state) * (t - s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompensatorSetup {
    pub n_paths: usize,
    pub horizon: f64,
    pub seed: u64,
    /// Time steps of simulated `PathQv` paths.
    pub n_steps: usize,
}

impl Default for CompensatorSetup {
    fn default() -> Self {
        CompensatorSetup { n_paths: 10_000, horizon: 1.0, seed: 0, n_steps: 1024 }
    }
}

impl CompensatorSetup {
    fn validate(&self) -> Result<()> {
        if self.n_paths < 2 || self.n_steps == 0 || !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("need n_paths >= 2, n_steps >= 1 and a positive horizon"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompensatorVerdict {
    pub model: String,
    pub test_process: String,
    pub compensator_rate: f64,
    /// Estimate of `E int Y dA`.
    pub integral_a: MeanEstimate,
    /// Estimate of `E int Y dA^p`.
    pub integral_compensator: MeanEstimate,
    pub difference: f64,
    /// `sqrt(se_A^2 + se_Ap^2)`.
    pub combined_se: f64,
    /// `|difference| <= 3 combined_se`.
    pub pass: bool,
}

/// One increment of `A`: a jump (`start == end`) or a continuous cell. The
/// integrand is read at `start` with the state just before it.
struct Increment {
    start: f64,
    end: f64,
    state: f64,
    size: f64,
}

/// One realisation of `A`. Continuous parts come as cells on a time grid.
struct Realisation {
    increments: Vec<Increment>,
    /// `(start, end, state)` pieces on which the state is held for quadrature.
    pieces: Vec<(f64, f64, f64)>,
    /// Rate at which `A` grows continuously on every piece.
    slope: f64,
}

fn realise(model: &IncreasingProcessModel, setup: &CompensatorSetup, index: usize) -> Result<Realisation> {
    let seed = derive_seed(setup.seed, index as u64);
    let horizon = setup.horizon;
    let events = |rate: f64, law: &JumpLaw| {
        let mut rng = path_rng(seed);
        let mut increments = Vec::new();
        let mut pieces = Vec::new();
        let (mut a, mut last) = (0.0, 0.0);
        for (t, size) in poisson_events(&mut rng, rate, horizon, law) {
            pieces.push((last, t, a));
            increments.push(Increment { start: t, end: t, state: a, size });
            a += size;
            last = t;
        }
        pieces.push((last, horizon, a));
        Realisation { increments, pieces, slope: 0.0 }
    };
    Ok(match model {
        IncreasingProcessModel::PoissonCounting { rate } => events(*rate, &JumpLaw::TwoPoint { p: 1.0, a1: 1.0, a2: 1.0 }),
        IncreasingProcessModel::CompoundPoissonIncreasing { rate, jump_law } => events(*rate, jump_law),
        IncreasingProcessModel::PathQv { model } => {
            let p = simulate(model, setup.n_steps, horizon, seed)?;
            let (t, x, pre) = (p.times(), p.values(), p.pre_values());
            let mut increments = Vec::with_capacity(2 * t.len());
            let mut pieces = Vec::with_capacity(t.len());
            for i in 1..t.len() {
                let dc = pre[i] - x[i - 1];
                increments.push(Increment { start: t[i - 1], end: t[i], state: x[i - 1], size: dc * dc });
                if pre[i] != x[i] {
                    let dj = x[i] - pre[i];
                    increments.push(Increment { start: t[i], end: t[i], state: pre[i], size: dj * dj });
                }
                pieces.push((t[i - 1], t[i], x[i - 1]));
            }
            Realisation { increments, pieces, slope: 0.0 }
        }
        IncreasingProcessModel::Deterministic { slope } => {
            let n = setup.n_steps;
            let pieces = (0..n)
                .map(|i| {
                    let (s, t) = (horizon * (i as f64 / n as f64), horizon * ((i + 1) as f64 / n as f64));
                    (s, t, slope * s)
                })
                .collect();
            Realisation { increments: Vec::new(), pieces, slope: *slope }
        }
    })
}

/// Checks `E int_0^T Y dA = E int_0^T Y dA^p` with the closed-form `A^p`.
pub fn verify_compensator(model: &IncreasingProcessModel, y: &TestProcess, setup: &CompensatorSetup) -> Result<CompensatorVerdict> {
    verify_compensator_with(model, y, setup, compensator_closed_form(model)?)
}

/// As [`verify_compensator`] against an arbitrary linear compensator, which
/// is how wrong intensities are injected as negative controls.
pub fn verify_compensator_with(
    model: &IncreasingProcessModel,
    y: &TestProcess,
    setup: &CompensatorSetup,
    compensator: LinearCompensator,
) -> Result<CompensatorVerdict> {
    model.validate()?;
    setup.validate()?;
    let proc = y.bind()?;
    let pairs: Vec<(f64, f64)> = try_par_map(setup.n_paths, |i| {
        let r = realise(model, setup, i)?;
        let mut int_a = 0.0;
        let mut int_p = 0.0;
        for inc in &r.increments {
            int_a += proc.eval(inc.start, inc.state) * inc.size;
        }
        for &(s, t, state) in &r.pieces {
            let q = proc.integrate(s, t, state);
            int_p += q * compensator.rate;
            int_a += q * r.slope;
        }
        Ok((int_a, int_p))
    })?;
    let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let p: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (ea, ep) = (MeanEstimate::from_samples(&a), MeanEstimate::from_samples(&p));
    let difference = ea.mean - ep.mean;
    let combined_se = (ea.std_err * ea.std_err + ep.std_err * ep.std_err).sqrt();
    Ok(CompensatorVerdict {
        model: model.label(),
        test_process: y.label(),
        compensator_rate: compensator.rate,
        integral_a: ea,
        integral_compensator: ep,
        difference,
        combined_se,
        pass: difference.abs() <= 3.0 * combined_se,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementCheck {
    pub from: f64,
    pub to: f64,
    /// Mean of `(A_t - A^p_t) - (A_s - A^p_s)`.
    pub estimate: MeanEstimate,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleVerdict {
    pub model: String,
    pub compensator_rate: f64,
    pub increments: Vec<IncrementCheck>,
    pub pass: bool,
}

/// Mean-zero test of the increments of `A - A^p` between consecutive
/// checkpoints, each within 3 standard errors of 0.
pub fn martingale_check(model: &IncreasingProcessModel, setup: &CompensatorSetup, checkpoints: &[f64]) -> Result<MartingaleVerdict> {
    martingale_check_with(model, setup, checkpoints, compensator_closed_form(model)?)
}

pub fn martingale_check_with(
    model: &IncreasingProcessModel,
    setup: &CompensatorSetup,
    checkpoints: &[f64],
    compensator: LinearCompensator,
) -> Result<MartingaleVerdict> {
    model.validate()?;
    setup.validate()?;
    if checkpoints.len() < 2 || checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("need at least two strictly increasing checkpoints"));
    }
    if checkpoints[0] < 0.0 || checkpoints[checkpoints.len() - 1] > setup.horizon {
        return Err(Error::invalid("checkpoints must lie in [0, horizon]"));
    }
    // per path: A_t - A^p_t at every checkpoint
    let rows: Vec<Vec<f64>> = try_par_map(setup.n_paths, |i| {
        let r = realise(model, setup, i)?;
        Ok(checkpoints
            .iter()
            .map(|&c| {
                let jumps: f64 = r.increments.iter().filter(|inc| inc.end <= c).map(|inc| inc.size).sum();
                let drift: f64 = r.pieces.iter().map(|&(s, t, _)| r.slope * (t.min(c) - s).max(0.0)).sum();
                let a = jumps + drift;
                a - compensator.eval(c)
            })
            .collect())
    })?;
    let increments: Vec<IncrementCheck> = checkpoints
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let d: Vec<f64> = rows.iter().map(|r| r[k + 1] - r[k]).collect();
            let estimate = MeanEstimate::from_samples(&d);
            IncrementCheck { from: w[0], to: w[1], estimate, pass: estimate.within(0.0, 3.0) }
        })
        .collect();
    let pass = increments.iter().all(|c| c.pass);
    Ok(MartingaleVerdict { model: model.label(), compensator_rate: compensator.rate, increments, pass })
}

/// Every (model, test process) pair the contract is checked on.
pub fn catalog_pairs() -> Vec<(IncreasingProcessModel, TestProcess)> {
    let models = [
        IncreasingProcessModel::PoissonCounting { rate: 3.0 },
        IncreasingProcessModel::CompoundPoissonIncreasing { rate: 2.0, jump_law: JumpLaw::Uniform { low: 0.0, high: 1.0 } },
        IncreasingProcessModel::PathQv { model: PathModel::standard_brownian() },
        IncreasingProcessModel::PathQv {
            model: PathModel::JumpDiffusion {
                sigma: 0.5,
                drift: 0.0,
                rate: 2.0,
                jump_law: JumpLaw::Normal { mean: 0.0, std: 0.5 },
                start: 0.0,
            },
        },
        IncreasingProcessModel::Deterministic { slope: 1.0 },
    ];
    let processes = [
        TestProcess::Constant { value: 1.0 },
        TestProcess::Constant { value: 0.0 },
        TestProcess::Indicator { tau: 0.5 },
        TestProcess::StateFunction { h: FnSpec::Cos },
    ];
    models.iter().flat_map(|m| processes.iter().map(move |y| (m.clone(), y.clone()))).collect()
}
