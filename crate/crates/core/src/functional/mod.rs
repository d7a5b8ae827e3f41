//! Two-index functionals on the real line: incremental ratios, partition
//! sums and their limits, Lipschitz-class scans, right derivatives and
//! expansion checks.

pub mod limits;
pub mod partition;
pub mod ratio;
pub mod scalar;
pub mod taylor;
pub mod two_index;

pub use limits::{summability_limit, variation_limit, LevelValue, LimitEstimate, VariationEstimate};
pub use partition::{partition_abs_sum, partition_sum, Partition, RefinementScheme};
pub use ratio::{
    approx_derivative, approx_derivative_of, default_schedule, incremental_ratio, lipschitz_scan, DerivativeEstimate,
    ScaleEstimate, ScanReport,
};
pub use scalar::{sign, FnSpec, LipschitzBound, RealFn, ScalarFn};
pub use taylor::{taylor_check, ExpansionReport, TaylorOptions, TaylorTerm};
pub use two_index::{PairFn, TwoIndexFn, TwoIndexKind};
