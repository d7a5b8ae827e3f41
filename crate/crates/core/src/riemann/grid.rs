use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::SamplePath;

/// How the stopping times of a Riemann sequence are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridScheme {
    /// Grid points nearest to `j T / 2^level`.
    Dyadic { level: u32 },
    /// Successive exits of `X` from `((j - 1) eps, (j + 1) eps)` around the
    /// last lattice value `j eps` it was anchored to.
    HittingTimes { eps: f64 },
}

impl GridScheme {
    pub fn label(&self) -> String {
        match self {
            GridScheme::Dyadic { level } => format!("dyadic({level})"),
            GridScheme::HittingTimes { eps } => format!("hitting({eps})"),
        }
    }
}

/// Increasing path indices `0 = n_0 < n_1 < .. < n_K = last`. Every jump
/// index of the path is included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiemannGrid {
    indices: Vec<usize>,
    scheme: GridScheme,
    mesh: f64,
    path_len: usize,
}

/// Builds the grid of `scheme` along `path`.
pub fn riemann_grid(path: &SamplePath, scheme: GridScheme) -> Result<RiemannGrid> {
    let mut indices = match scheme {
        GridScheme::Dyadic { level } => dyadic_indices(path, level)?,
        GridScheme::HittingTimes { eps } => hitting_indices(path, eps)?,
    };
    indices.extend(path.jumps().iter().map(|j| j.index));
    indices.sort_unstable();
    indices.dedup();
    Ok(RiemannGrid::from_indices(path, indices, scheme))
}

fn dyadic_indices(path: &SamplePath, level: u32) -> Result<Vec<usize>> {
    if level > 30 {
        return Err(Error::invalid(format!("dyadic level {level} above 30")));
    }
    let n = 1u64 << level;
    let times = path.times();
    let mut out = Vec::with_capacity(n as usize + 1);
    for j in 0..=n {
        let t = path.horizon() * (j as f64 / n as f64);
        let k = times.partition_point(|s| *s < t);
        let i = if k == times.len() || (k > 0 && t - times[k - 1] < times[k] - t) { k - 1 } else { k };
        out.push(i);
    }
    Ok(out)
}

fn hitting_indices(path: &SamplePath, eps: f64) -> Result<Vec<usize>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("hitting lattice spacing must be positive, got {eps}")));
    }
    let resolution = path.mean_continuous_step();
    if eps <= resolution {
        return Err(Error::ResolutionExhausted(format!(
            "lattice spacing {eps} is not above the mean path step {resolution}"
        )));
    }
    let x = path.values();
    let mut anchor = (x[0] / eps).round();
    let mut out = vec![0];
    for (i, &xi) in x.iter().enumerate().skip(1) {
        if path.is_jump_index(i) {
            out.push(i);
            anchor = (xi / eps).round();
        } else if xi >= (anchor + 1.0) * eps {
            out.push(i);
            anchor = (xi / eps).floor();
        } else if xi <= (anchor - 1.0) * eps {
            out.push(i);
            anchor = (xi / eps).ceil();
        }
    }
    out.push(x.len() - 1);
    Ok(out)
}

impl RiemannGrid {
    fn from_indices(path: &SamplePath, indices: Vec<usize>, scheme: GridScheme) -> Self {
        let t = path.times();
        let mesh = indices.windows(2).map(|w| t[w[1]] - t[w[0]]).fold(0.0, f64::max);
        RiemannGrid { indices, scheme, mesh, path_len: path.len() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    /// Largest time gap between consecutive grid points.
    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn times(&self, path: &SamplePath) -> Vec<f64> {
        self.indices.iter().map(|&i| path.times()[i]).collect()
    }

    /// Fails unless the grid was built on a path of the same length.
    pub fn check(&self, path: &SamplePath) -> Result<()> {
        if self.path_len != path.len() {
            return Err(Error::GridMismatch { grid_len: self.path_len, path_len: path.len() });
        }
        Ok(())
    }

    /// Grid points at times `<= sigma`, closed by the path index of `sigma`.
    pub fn truncated(&self, path: &SamplePath, sigma: f64) -> Result<RiemannGrid> {
        self.check(path)?;
        if !(0.0..=path.horizon()).contains(&sigma) {
            return Err(Error::invalid(format!("stopping time {sigma} outside [0, {}]", path.horizon())));
        }
        let last = path.index_at(sigma);
        let mut indices: Vec<usize> = self.indices.iter().copied().take_while(|&i| i <= last).collect();
        if indices.last() != Some(&last) {
            indices.push(last);
        }
        Ok(RiemannGrid::from_indices(path, indices, self.scheme))
    }
}
