//! Sums of two-index functionals along Riemann sequences of stopping times.

mod convergence;
mod functional;
mod grid;

pub use convergence::{limit_in_probability, ConvergenceDiagnostic, ConvergenceSetup, SchemeLadder, SchemeTrace};
pub use functional::{
    class_scan, grid_nodes, pathwise_sum, stopped_functional, t_x, BoundType, ClassScan, FunctionalTemplate, LevelExtremes, Node,
    PathFunctional,
};
pub use grid::{riemann_grid, GridScheme, RiemannGrid};
