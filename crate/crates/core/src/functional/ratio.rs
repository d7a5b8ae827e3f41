use serde::{Deserialize, Serialize};

use super::scalar::ScalarFn;
use super::two_index::TwoIndexFn;
use crate::error::{Error, Result};

/// The k-th incremental ratio `F^k_{h_1..h_k}(x)` with `k = h.len()`.
///
/// `F^1_{h1}(x) = F(x, x + h1) / h1` and
/// `F^k_{h1..hk}(x) = (F^{k-1}_{h1..h(k-1)}(x + hk) - F^{k-1}_{h1..h(k-1)}(x)) / hk`.
pub fn incremental_ratio(f: &TwoIndexFn, x: f64, h: &[f64]) -> Result<f64> {
    if h.is_empty() {
        return Err(Error::invalid("incremental ratio of order 0"));
    }
    if let Some(bad) = h.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(format!("increments must be positive and finite, got {bad}")));
    }
    let v = ratio_unchecked(f, x, h);
    if v.is_infinite() {
        return Err(Error::NumericRange(format!("order-{} ratio at x = {x} overflows for h = {h:?}", h.len())));
    }
    Ok(v)
}

fn ratio_unchecked(f: &TwoIndexFn, x: f64, h: &[f64]) -> f64 {
    match h.split_last() {
        None => unreachable!("order checked by caller"),
        Some((&h1, [])) => f.eval(x, x + h1) / h1,
        Some((&hk, rest)) => (ratio_unchecked(f, x + hk, rest) - ratio_unchecked(f, x, rest)) / hk,
    }
}

/// Largest and smallest ratio seen at one scale of a [`lipschitz_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleEstimate {
    pub scale: f64,
    pub sup_abs: f64,
    pub sup: f64,
    pub inf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub order: usize,
    pub interval: (f64, f64),
    /// `sup |F^k|` at the finest scale.
    pub sup_estimate: f64,
    pub sup: f64,
    pub inf: f64,
    /// `sup |F^k|` stays put as the increments shrink.
    pub bounded: bool,
    /// The negative part `max(0, -inf F^k)` stays put as the increments shrink.
    pub lower_bounded: bool,
    /// `F` produced a NaN somewhere on the scan.
    pub failed: bool,
    pub trace: Vec<ScaleEstimate>,
}

const SCAN_SCALES: usize = 4;
const SCAN_MAX_POINTS: usize = 1 << 16;

/// Scans `F^k(x; h_1..h_k)` for `x` in `[lo, hi]` and all `h_i <= h_max`.
///
/// The increments are tried at four dyadic scales `s, s/4, s/16, s/64`
/// (`s` is `h_max` rounded down to a power of two); at each scale every
/// `h_i` ranges over `{s, s/2, s/4}` and `x` over a dyadic grid of spacing at
/// most `min(1/density, s/4)`. A bound is declared when the finest-scale
/// supremum is at most twice the coarsest one (plus `1e-6`), i.e. the
/// estimate does not keep growing as the increments vanish.
pub fn lipschitz_scan(f: &TwoIndexFn, k: usize, interval: (f64, f64), h_max: f64, density: f64) -> Result<ScanReport> {
    let (lo, hi) = interval;
    if k == 0 || k > 6 {
        return Err(Error::invalid(format!("scan order must be in 1..=6, got {k}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::invalid("scan interval must be finite with lo <= hi"));
    }
    if !(h_max > 0.0 && h_max.is_finite() && density > 0.0) {
        return Err(Error::invalid("h_max and grid density must be positive"));
    }
    let s0 = pow2_floor(h_max);
    let mut trace = Vec::with_capacity(SCAN_SCALES);
    let mut failed = false;
    for i in 0..SCAN_SCALES {
        let s = s0 / 4f64.powi(i as i32);
        let mut spacing = pow2_floor((1.0 / density).min(s / 4.0));
        while (hi - lo) / spacing > SCAN_MAX_POINTS as f64 {
            spacing *= 2.0;
        }
        let n_points = ((hi - lo) / spacing).floor() as usize + 1;
        let steps = [s, s / 2.0, s / 4.0];
        let mut est = ScaleEstimate { scale: s, sup_abs: 0.0, sup: f64::NEG_INFINITY, inf: f64::INFINITY };
        let mut h = vec![0.0; k];
        for combo in 0..3usize.pow(k as u32) {
            let mut c = combo;
            for hi_ in h.iter_mut() {
                *hi_ = steps[c % 3];
                c /= 3;
            }
            for p in 0..n_points {
                let x = lo + p as f64 * spacing;
                let v = ratio_unchecked(f, x, &h);
                if v.is_nan() {
                    failed = true;
                    continue;
                }
                est.sup_abs = est.sup_abs.max(v.abs());
                est.sup = est.sup.max(v);
                est.inf = est.inf.min(v);
            }
        }
        trace.push(est);
    }
    let (first, last) = (trace[0], trace[SCAN_SCALES - 1]);
    let stable = |coarse: f64, fine: f64| fine.is_finite() && fine <= 2.0 * coarse + 1e-6;
    let neg = |e: &ScaleEstimate| (-e.inf).max(0.0);
    Ok(ScanReport {
        order: k,
        interval,
        sup_estimate: last.sup_abs,
        sup: trace.iter().map(|e| e.sup).fold(f64::NEG_INFINITY, f64::max),
        inf: trace.iter().map(|e| e.inf).fold(f64::INFINITY, f64::min),
        bounded: !failed && stable(first.sup_abs, last.sup_abs),
        lower_bounded: !failed && stable(neg(&first), neg(&last)),
        failed,
        trace,
    })
}

fn pow2_floor(v: f64) -> f64 {
    2f64.powi(v.log2().floor() as i32)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeEstimate {
    pub order: usize,
    pub x: f64,
    pub value: f64,
    pub exists: bool,
    /// `(h, F^j(x; h, .., h), extrapolated value)` along the schedule.
    pub trace: Vec<(f64, f64, f64)>,
}

/// `h_n = 2^{-3-n}` for `n < len`.
pub fn default_schedule(len: usize) -> Vec<f64> {
    (0..len).map(|n| 2f64.powi(-3 - n as i32)).collect()
}

const EXTRAPOLATION_DEPTH: usize = 4;
const DERIVATIVE_RTOL: f64 = 1e-6;

/// Right derivative `D_+^j f(x)` as the limit of `F^j(x; h, .., h)` for `F = f^`.
///
/// See [`approx_derivative_of`].
pub fn approx_derivative(f: &ScalarFn, j: usize, x: f64, schedule: &[f64]) -> Result<DerivativeEstimate> {
    approx_derivative_of(&TwoIndexFn::hat(f), j, x, schedule)
}

/// Limit of `F^j(x; h, .., h)` as `h` runs down `schedule`.
///
/// The ratios are extrapolated to `h = 0` by Neville's scheme (at most four
/// columns, so smooth ratios converge at `O(h^4)`). The limit is declared to
/// exist once the tableau is full and three successive extrapolants agree to
/// `1e-6` relative (absolute below magnitude 1); a single agreeing pair can be
/// a coincidence of symmetric differences. If the schedule runs out first,
/// `exists` is false and `value` holds the last extrapolant.
pub fn approx_derivative_of(f: &TwoIndexFn, j: usize, x: f64, schedule: &[f64]) -> Result<DerivativeEstimate> {
    if j == 0 {
        return Err(Error::invalid("derivative order must be at least 1"));
    }
    if schedule.len() < 2 {
        return Err(Error::invalid("derivative schedule needs at least two steps"));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) || schedule.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::invalid("derivative schedule must be positive and strictly decreasing"));
    }
    let mut tableau: Vec<Vec<f64>> = Vec::with_capacity(schedule.len());
    let mut trace = Vec::with_capacity(schedule.len());
    let mut prev: Option<f64> = None;
    let mut agreeing = 0;
    for (i, &h) in schedule.iter().enumerate() {
        let r = incremental_ratio(f, x, &vec![h; j])?;
        let mut row = vec![r];
        for m in 1..=i.min(EXTRAPOLATION_DEPTH - 1) {
            let ratio = schedule[i - m] / h;
            let t = row[m - 1] + (row[m - 1] - tableau[i - 1][m - 1]) / (ratio - 1.0);
            row.push(t);
        }
        let est = *row.last().unwrap();
        trace.push((h, r, est));
        tableau.push(row);
        if let Some(p) = prev {
            if est.is_finite() && (est - p).abs() <= DERIVATIVE_RTOL * est.abs().max(1.0) {
                agreeing += 1;
            } else {
                agreeing = 0;
            }
            if agreeing >= 2 && i >= EXTRAPOLATION_DEPTH {
                return Ok(DerivativeEstimate { order: j, x, value: est, exists: true, trace });
            }
        }
        prev = Some(est);
    }
    Ok(DerivativeEstimate { order: j, x, value: prev.unwrap_or(f64::NAN), exists: false, trace })
}
