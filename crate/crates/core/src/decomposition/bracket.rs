use serde::{Deserialize, Serialize};

use crate::path::PathModel;

/// Closed-form predictable brackets of a test-bed model, both linear in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketModel {
    /// `d<X^c>_t / dt`.
    pub continuous_rate: f64,
    /// Jump part of `d<X>_t / dt`, i.e. `lambda E[J^2]`.
    pub jump_rate: f64,
}

impl BracketModel {
    pub fn from_model(model: &PathModel) -> Self {
        let sigma = model.sigma();
        let jump_rate = model.jump_law().map_or(0.0, |law| model.jump_rate() * law.second_moment());
        BracketModel { continuous_rate: sigma * sigma, jump_rate }
    }

    pub fn zero() -> Self {
        BracketModel { continuous_rate: 0.0, jump_rate: 0.0 }
    }

    /// `<X^c>_t`.
    pub fn continuous(&self, t: f64) -> f64 {
        self.continuous_rate * t
    }

    /// `<X>_t = <X^c>_t + lambda E[J^2] t`.
    pub fn total(&self, t: f64) -> f64 {
        self.continuous(t) + self.jump_rate * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::JumpLaw;

    #[test]
    fn brackets() {
        assert_eq!(BracketModel::from_model(&PathModel::standard_brownian()).total(0.7), 0.7);
        let fv = PathModel::FiniteVariation { knots: vec![(0.0, 0.0), (1.0, 3.0)] };
        assert_eq!(BracketModel::from_model(&fv), BracketModel::zero());
        let jd = PathModel::JumpDiffusion {
            sigma: 0.5,
            drift: 1.0,
            rate: 2.0,
            jump_law: JumpLaw::TwoPoint { p: 0.5, a1: 1.0, a2: -3.0 },
            start: 0.0,
        };
        let b = BracketModel::from_model(&jd);
        assert_eq!(b.continuous(2.0), 0.5);
        assert_eq!(b.total(2.0), 0.5 + 2.0 * 5.0 * 2.0);
        for t in [0.0, 0.3, 1.0, 4.0] {
            assert!(b.continuous(t) <= b.total(t) && b.continuous(t) >= 0.0);
        }
    }
}
