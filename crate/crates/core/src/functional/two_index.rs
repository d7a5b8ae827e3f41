use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::scalar::ScalarFn;

pub type PairFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// How a [`TwoIndexFn`] was assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoIndexKind {
    /// `f(y) - f(x)`
    HatF,
    /// `g(x) (f(y) - f(x))`
    WeightedHat,
    /// `f(y) - f(x) - g(x)(y - x)`
    Star,
    /// `(y - x)^2`
    Quadratic,
    Custom,
}

/// A generalized increment `F(x, y)` on pairs of reals.
///
/// Every constructor except [`TwoIndexFn::custom`] vanishes on the diagonal by
/// construction; custom functionals are expected to as well (see
/// [`TwoIndexFn::diagonal_defect`]).
#[derive(Clone)]
pub struct TwoIndexFn {
    eval: PairFn,
    kind: TwoIndexKind,
    sources: Vec<ScalarFn>,
    label: String,
}

impl fmt::Debug for TwoIndexFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwoIndexFn").field("kind", &self.kind).field("label", &self.label).finish()
    }
}

impl TwoIndexFn {
    /// `f^(x, y) = f(y) - f(x)`.
    pub fn hat(f: &ScalarFn) -> Self {
        let e = f.as_fn();
        TwoIndexFn {
            eval: Arc::new(move |x, y| e(y) - e(x)),
            kind: TwoIndexKind::HatF,
            sources: vec![f.clone()],
            label: format!("hat({})", f.label()),
        }
    }

    /// `g(x) f^(x, y)`.
    pub fn weighted_hat(g: &ScalarFn, f: &ScalarFn) -> Self {
        let (ge, fe) = (g.as_fn(), f.as_fn());
        TwoIndexFn {
            eval: Arc::new(move |x, y| ge(x) * (fe(y) - fe(x))),
            kind: TwoIndexKind::WeightedHat,
            sources: vec![g.clone(), f.clone()],
            label: format!("{}*hat({})", g.label(), f.label()),
        }
    }

    /// `(f * g)(x, y) = f(y) - f(x) - g(x)(y - x)`.
    pub fn star(f: &ScalarFn, g: &ScalarFn) -> Self {
        let (fe, ge) = (f.as_fn(), g.as_fn());
        TwoIndexFn {
            eval: Arc::new(move |x, y| fe(y) - fe(x) - ge(x) * (y - x)),
            kind: TwoIndexKind::Star,
            sources: vec![f.clone(), g.clone()],
            label: format!("star({}, {})", f.label(), g.label()),
        }
    }

    /// `F_0(x, y) = (y - x)^2`.
    pub fn quadratic() -> Self {
        TwoIndexFn {
            eval: Arc::new(|x, y| (y - x) * (y - x)),
            kind: TwoIndexKind::Quadratic,
            sources: Vec::new(),
            label: "quadratic".into(),
        }
    }

    pub fn custom(label: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        TwoIndexFn { eval: Arc::new(f), kind: TwoIndexKind::Custom, sources: Vec::new(), label: label.into() }
    }

    /// `c F`.
    pub fn scaled(&self, c: f64) -> Self {
        let e = Arc::clone(&self.eval);
        TwoIndexFn {
            eval: Arc::new(move |x, y| c * e(x, y)),
            kind: TwoIndexKind::Custom,
            sources: self.sources.clone(),
            label: format!("{}*{}", c, self.label),
        }
    }

    /// `F + G`.
    pub fn plus(&self, other: &TwoIndexFn) -> Self {
        let (a, b) = (Arc::clone(&self.eval), Arc::clone(&other.eval));
        let mut sources = self.sources.clone();
        sources.extend(other.sources.iter().cloned());
        TwoIndexFn {
            eval: Arc::new(move |x, y| a(x, y) + b(x, y)),
            kind: TwoIndexKind::Custom,
            sources,
            label: format!("{} + {}", self.label, other.label),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.eval)(x, y)
    }

    pub fn kind(&self) -> TwoIndexKind {
        self.kind
    }

    pub fn sources(&self) -> &[ScalarFn] {
        &self.sources
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Largest `|F(x, x)|` over the given points.
    pub fn diagonal_defect(&self, xs: &[f64]) -> f64 {
        xs.iter().map(|&x| self.eval(x, x).abs()).fold(0.0, f64::max)
    }
}
