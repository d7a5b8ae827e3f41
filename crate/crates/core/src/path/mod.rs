//! Seeded semimartingale sample paths with explicit jump marks.

mod model;
mod sample;
mod split;

pub use model::{poisson_events, JumpLaw, PathModel};
pub use sample::{simulate, Jump, SamplePath, VALUE_LIMIT, VALUE_QUANTUM};
pub use split::{recombine, split_jumps};

use crate::riemann::RiemannGrid;

/// `sum (X_{T_n} - X_{T_{n-1}})^2` over consecutive grid points.
pub fn realized_qv(path: &SamplePath, grid: &RiemannGrid) -> f64 {
    let x = path.values();
    grid.indices().windows(2).map(|w| {
        let d = x[w[1]] - x[w[0]];
        d * d
    }).sum()
}
