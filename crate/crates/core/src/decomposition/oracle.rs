use crate::error::{Error, Result};
use crate::path::SamplePath;

/// Occupation density `(1 / 2 eps) Leb{s <= T : |X_s - level| < eps}` of the
/// piecewise-linear interpolation of the path.
///
/// Each cell interpolates from `X_{t_{i-1}}` to the left limit `X_{t_i -}`, so
/// jumps are crossed instantly. The occupation of every cell is exact for the
/// interpolant.
pub fn local_time_oracle(path: &SamplePath, level: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite() && level.is_finite()) {
        return Err(Error::invalid("need a finite level and eps > 0"));
    }
    let resolution = path.mean_continuous_step();
    if eps < resolution {
        return Err(Error::ResolutionExhausted(format!("eps {eps} is below the mean path step {resolution}")));
    }
    let (t, x, pre) = (path.times(), path.values(), path.pre_values());
    let (lo, hi) = (level - eps, level + eps);
    let mut occupation = 0.0;
    for i in 1..x.len() {
        let (u, v) = (x[i - 1], pre[i]);
        let dt = t[i] - t[i - 1];
        let fraction = if u == v {
            if u > lo && u < hi {
                1.0
            } else {
                0.0
            }
        } else {
            let (a, b) = (u.min(v), u.max(v));
            ((b.min(hi) - a.max(lo)).max(0.0)) / (b - a)
        };
        occupation += fraction * dt;
    }
    Ok(occupation / (2.0 * eps))
}
