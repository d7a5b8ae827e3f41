//! Shared fixtures for the benchmarks.

use pathcalc_core::{simulate, JumpLaw, PathModel, SamplePath};

pub fn jump_diffusion() -> PathModel {
    PathModel::JumpDiffusion { sigma: 1.0, drift: 0.0, rate: 5.0, jump_law: JumpLaw::Normal { mean: 0.0, std: 0.3 }, start: 0.0 }
}

/// Brownian path with `2^level` steps on `[0, 1]`.
pub fn brownian_path(level: u32, seed: u64) -> SamplePath {
    simulate(&PathModel::standard_brownian(), 1 << level, 1.0, seed).expect("valid model")
}
