//! Pathwise calculus for two-index functionals.
//!
//! The crate covers real-line partition calculus ([`functional`]), seeded
//! semimartingale paths ([`path`]), sums along Riemann sequences of stopping
//! times ([`riemann`]), generalized Itô/Tanaka decompositions
//! ([`decomposition`]) and Monte Carlo checks of predictable compensators
//! ([`compensator`]).

pub mod compensator;
pub mod decomposition;
pub mod error;
pub mod functional;
pub mod mc;
pub mod path;
pub mod riemann;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use functional::{FnSpec, Partition, ScalarFn, TwoIndexFn, TwoIndexKind};
pub use compensator::{IncreasingProcessModel, TestProcess};
pub use decomposition::{BracketModel, DecompositionMode, DecompositionReport, Decomposer};
pub use path::{simulate, JumpLaw, PathModel, SamplePath};
pub use riemann::{riemann_grid, GridScheme, RiemannGrid};
