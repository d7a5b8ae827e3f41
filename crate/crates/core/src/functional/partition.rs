use rand::Rng;
use serde::{Deserialize, Serialize};

use super::two_index::TwoIndexFn;
use crate::error::{Error, Result};
use crate::rng::path_rng;

/// A finite collection of points inside an open interval `(a, b)`.
///
/// Partition sums run over the points augmented with the endpoints, so the
/// empty partition has the single cell `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    a: f64,
    b: f64,
    points: Vec<f64>,
}

impl Partition {
    /// Builds a partition, sorting `points`. Points must lie strictly inside `(a, b)`.
    pub fn new(a: f64, b: f64, mut points: Vec<f64>) -> Result<Self> {
        check_interval(a, b)?;
        if points.iter().any(|p| !(a < *p && *p < b)) {
            return Err(Error::invalid("partition points must lie strictly inside (a, b)"));
        }
        points.sort_by(f64::total_cmp);
        Ok(Partition { a, b, points })
    }

    /// `n` equal cells.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        check_interval(a, b)?;
        if n == 0 {
            return Err(Error::invalid("a uniform partition needs at least one cell"));
        }
        let width = b - a;
        let points = (1..n).map(|i| a + width * (i as f64 / n as f64)).collect();
        Ok(Partition { a, b, points })
    }

    /// `2^level` equal cells. Dyadic partitions of the same interval are nested
    /// exactly (as floating-point sets).
    pub fn dyadic(a: f64, b: f64, level: u32) -> Result<Self> {
        if level > 40 {
            return Err(Error::invalid("dyadic level above 40"));
        }
        Partition::uniform(a, b, 1usize << level)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Largest cell width.
    pub fn mesh(&self) -> f64 {
        self.nodes().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Points with the endpoints attached: `a, x_1, ..., x_N, b`.
    pub fn nodes(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.points.len() + 2);
        v.push(self.a);
        v.extend_from_slice(&self.points);
        v.push(self.b);
        v
    }

    /// Whether every point of `self` is a point of `finer`.
    pub fn is_refined_by(&self, finer: &Partition) -> bool {
        if self.interval() != finer.interval() {
            return false;
        }
        let mut j = 0;
        for p in &self.points {
            while j < finer.points.len() && finer.points[j] < *p {
                j += 1;
            }
            if j == finer.points.len() || finer.points[j] != *p {
                return false;
            }
        }
        true
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("interval endpoints must be finite for computation"));
    }
    if a >= b {
        return Err(Error::invalid(format!("empty interval: a = {a} >= b = {b}")));
    }
    Ok(())
}

/// `sum F(x_{n-1}, x_n)` over consecutive nodes of `a, pi, b`.
pub fn partition_sum(f: &TwoIndexFn, pi: &Partition) -> f64 {
    let mut prev = pi.a;
    let mut sum = 0.0;
    for &x in pi.points.iter().chain(std::iter::once(&pi.b)) {
        sum += f.eval(prev, x);
        prev = x;
    }
    sum
}

/// `sum |F(x_{n-1}, x_n)|` over consecutive nodes of `a, pi, b`.
pub fn partition_abs_sum(f: &TwoIndexFn, pi: &Partition) -> f64 {
    let mut prev = pi.a;
    let mut sum = 0.0;
    for &x in pi.points.iter().chain(std::iter::once(&pi.b)) {
        sum += f.eval(prev, x).abs();
        prev = x;
    }
    sum
}

/// A rule producing a refining chain of partitions with mesh going to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RefinementScheme {
    /// Level `l` has `2^l` equal cells.
    Dyadic { max_level: u32 },
    /// Every cell of the previous level is split at a uniformly drawn point of
    /// its middle half, so the mesh at level `l` is at most `(3/4)^l (b - a)`.
    RandomBisection { seed: u64, max_level: u32 },
}

impl RefinementScheme {
    pub fn max_level(&self) -> u32 {
        match *self {
            RefinementScheme::Dyadic { max_level } | RefinementScheme::RandomBisection { max_level, .. } => max_level,
        }
    }

    /// The chain `pi_0 ⊆ pi_1 ⊆ ... ⊆ pi_max_level` on `(a, b)`, lazily.
    pub fn chain(&self, a: f64, b: f64) -> Result<RefinementChain> {
        check_interval(a, b)?;
        if self.max_level() > 26 {
            return Err(Error::invalid("refinement chains are capped at level 26"));
        }
        Ok(RefinementChain { scheme: *self, a, b, level: 0, current: None, rng: None })
    }
}

/// Iterator over the partitions of a [`RefinementScheme`].
pub struct RefinementChain {
    scheme: RefinementScheme,
    a: f64,
    b: f64,
    level: u32,
    current: Option<Partition>,
    rng: Option<crate::rng::PathRng>,
}

impl Iterator for RefinementChain {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.level > self.scheme.max_level() {
            return None;
        }
        let next = match self.scheme {
            RefinementScheme::Dyadic { .. } => Partition::dyadic(self.a, self.b, self.level).ok()?,
            RefinementScheme::RandomBisection { seed, .. } => match &self.current {
                None => {
                    self.rng = Some(path_rng(seed));
                    Partition { a: self.a, b: self.b, points: Vec::new() }
                }
                Some(prev) => {
                    let rng = self.rng.as_mut().expect("rng seeded at level 0");
                    let nodes = prev.nodes();
                    let mut points = Vec::with_capacity(2 * nodes.len());
                    for w in nodes.windows(2) {
                        if w[0] != self.a {
                            points.push(w[0]);
                        }
                        let u: f64 = rng.random_range(0.25..0.75);
                        let p = w[0] + u * (w[1] - w[0]);
                        if w[0] < p && p < w[1] {
                            points.push(p);
                        }
                    }
                    Partition { a: self.a, b: self.b, points }
                }
            },
        };
        self.level += 1;
        self.current = Some(next.clone());
        Some(next)
    }
}
