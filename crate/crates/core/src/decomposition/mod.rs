//! Term-by-term Itô and Tanaka decompositions of `f(X)` along a grid.

mod bracket;
mod decompose;
mod oracle;
mod report;
mod verify;

pub use bracket::BracketModel;
pub use decompose::{ito_decompose, padded_range, path_range, stochastic_integral, tanaka_decompose, Decomposer};
pub use oracle::local_time_oracle;
pub use report::{DecompositionMode, DecompositionReport};
pub use verify::{verify_levels, verify_report, CheckOutcome, Verdict};
