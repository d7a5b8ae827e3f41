//! Parallel per-path evaluation.
//!
//! Work items are fanned out with rayon and collected in index order, so any
//! reduction done afterwards sees the same sequence regardless of thread count.

use rayon::prelude::*;

use crate::error::Result;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PATHCALC_THREADS";

/// `f(0), .., f(n - 1)` in order, computed in parallel.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Like [`par_map`], failing with the error of the lowest failing index.
pub fn try_par_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    par_map(n, f).into_iter().collect()
}

/// Reads [`THREADS_ENV`] and, when it holds a positive integer, sizes the
/// global rayon pool accordingly. Returns the requested count. Has no effect
/// once the global pool has been built.
pub fn init_threads_from_env() -> Option<usize> {
    let n = std::env::var(THREADS_ENV).ok()?.trim().parse::<usize>().ok().filter(|n| *n > 0)?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Some(n)
}
