use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::PathRng;

/// Distribution of jump sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpLaw {
    /// `a1` with probability `p`, otherwise `a2`.
    TwoPoint { p: f64, a1: f64, a2: f64 },
    Uniform { low: f64, high: f64 },
    Normal { mean: f64, std: f64 },
}

impl JumpLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            JumpLaw::TwoPoint { p, a1, a2 } => (0.0..=1.0).contains(&p) && a1.is_finite() && a2.is_finite(),
            JumpLaw::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
            JumpLaw::Normal { mean, std } => mean.is_finite() && std.is_finite() && std >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("malformed jump law {self:?}")))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            JumpLaw::TwoPoint { p, a1, a2 } => p * a1 + (1.0 - p) * a2,
            JumpLaw::Uniform { low, high } => 0.5 * (low + high),
            JumpLaw::Normal { mean, .. } => mean,
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            JumpLaw::TwoPoint { p, a1, a2 } => p * a1 * a1 + (1.0 - p) * a2 * a2,
            JumpLaw::Uniform { low, high } => (low * low + low * high + high * high) / 3.0,
            JumpLaw::Normal { mean, std } => mean * mean + std * std,
        }
    }

    /// Supported on `[0, inf)`.
    pub fn is_nonnegative(&self) -> bool {
        match *self {
            JumpLaw::TwoPoint { p, a1, a2 } => (p == 0.0 || a1 >= 0.0) && (p == 1.0 || a2 >= 0.0),
            JumpLaw::Uniform { low, .. } => low >= 0.0,
            JumpLaw::Normal { mean, std } => std == 0.0 && mean >= 0.0,
        }
    }

    pub fn sample(&self, rng: &mut PathRng) -> f64 {
        match *self {
            JumpLaw::TwoPoint { p, a1, a2 } => {
                if rng.random::<f64>() < p {
                    a1
                } else {
                    a2
                }
            }
            JumpLaw::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            JumpLaw::Normal { mean, std } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + std * z
            }
        }
    }
}

/// Test-bed semimartingales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathModel {
    /// `start + drift t + sigma W_t`.
    BrownianMotion {
        sigma: f64,
        #[serde(default)]
        drift: f64,
        #[serde(default)]
        start: f64,
    },
    /// `start + sum_{k <= N_t} J_k` with `N` a Poisson process of intensity `rate`.
    CompoundPoissonJumps {
        rate: f64,
        jump_law: JumpLaw,
        #[serde(default)]
        start: f64,
    },
    /// Sum of the two above, driven by independent noise.
    JumpDiffusion {
        sigma: f64,
        #[serde(default)]
        drift: f64,
        rate: f64,
        jump_law: JumpLaw,
        #[serde(default)]
        start: f64,
    },
    /// Piecewise-linear interpolation of `(time, value)` knots, held constant
    /// after the last knot. The first knot must sit at time 0.
    FiniteVariation { knots: Vec<(f64, f64)> },
}

impl PathModel {
    pub fn standard_brownian() -> Self {
        PathModel::BrownianMotion { sigma: 1.0, drift: 0.0, start: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            PathModel::BrownianMotion { sigma, drift, start } => {
                if !(finite(&[*sigma, *drift, *start]) && *sigma >= 0.0) {
                    return Err(Error::invalid("Brownian motion needs finite parameters and sigma >= 0"));
                }
            }
            PathModel::CompoundPoissonJumps { rate, jump_law, start } => {
                if !(finite(&[*rate, *start]) && *rate >= 0.0) {
                    return Err(Error::invalid("compound Poisson needs a finite rate >= 0"));
                }
                jump_law.validate()?;
            }
            PathModel::JumpDiffusion { sigma, drift, rate, jump_law, start } => {
                if !(finite(&[*sigma, *drift, *rate, *start]) && *sigma >= 0.0 && *rate >= 0.0) {
                    return Err(Error::invalid("jump diffusion needs finite parameters, sigma >= 0 and rate >= 0"));
                }
                jump_law.validate()?;
            }
            PathModel::FiniteVariation { knots } => {
                if knots.is_empty() || knots[0].0 != 0.0 {
                    return Err(Error::invalid("finite-variation knots must start at time 0"));
                }
                if knots.iter().any(|(t, x)| !(t.is_finite() && x.is_finite())) {
                    return Err(Error::invalid("finite-variation knots must be finite"));
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::invalid("finite-variation knot times must increase strictly"));
                }
            }
        }
        Ok(())
    }

    /// Volatility of the continuous martingale part.
    pub fn sigma(&self) -> f64 {
        match *self {
            PathModel::BrownianMotion { sigma, .. } | PathModel::JumpDiffusion { sigma, .. } => sigma,
            _ => 0.0,
        }
    }

    pub fn jump_rate(&self) -> f64 {
        match *self {
            PathModel::CompoundPoissonJumps { rate, .. } | PathModel::JumpDiffusion { rate, .. } => rate,
            _ => 0.0,
        }
    }

    pub fn jump_law(&self) -> Option<JumpLaw> {
        match *self {
            PathModel::CompoundPoissonJumps { jump_law, .. } | PathModel::JumpDiffusion { jump_law, .. } => Some(jump_law),
            _ => None,
        }
    }

    /// Whether sample paths can jump (and are therefore kept on the value lattice).
    pub fn has_jumps(&self) -> bool {
        matches!(self, PathModel::CompoundPoissonJumps { .. } | PathModel::JumpDiffusion { .. })
    }

    pub fn label(&self) -> String {
        match self {
            PathModel::BrownianMotion { sigma, drift, start } => format!("bm(sigma={sigma}, drift={drift}, start={start})"),
            PathModel::CompoundPoissonJumps { rate, jump_law, .. } => format!("cpp(rate={rate}, {jump_law:?})"),
            PathModel::JumpDiffusion { sigma, rate, jump_law, .. } => format!("jd(sigma={sigma}, rate={rate}, {jump_law:?})"),
            PathModel::FiniteVariation { knots } => format!("fv({} knots)", knots.len()),
        }
    }

    pub const KINDS: [&'static str; 4] = ["brownian_motion", "compound_poisson_jumps", "jump_diffusion", "finite_variation"];
}

/// Event times of a Poisson process of intensity `rate` on `(0, horizon]`,
/// each with a size drawn from `law`. Draws alternate waiting time, size.
pub fn poisson_events(rng: &mut PathRng, rate: f64, horizon: f64, law: &JumpLaw) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    let mut t = 0.0;
    loop {
        let w: f64 = rng.sample(Exp1);
        t += w / rate;
        if t > horizon {
            return out;
        }
        let size = law.sample(rng);
        out.push((t, size));
    }
}
