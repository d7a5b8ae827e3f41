use serde::{Deserialize, Serialize};

use super::limits::summability_limit;
use super::partition::RefinementScheme;
use super::ratio::{approx_derivative_of, default_schedule, lipschitz_scan};
use super::two_index::TwoIndexFn;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorOptions {
    /// Refinement depth for `I(F; a, b)`.
    pub max_level: u32,
    pub summability_tol: f64,
    /// Largest increment used when scanning `F^k` over `[a, b]`.
    pub scan_h_max: f64,
    pub scan_density: f64,
    /// Relative tolerance for `remainder <= bound`.
    pub bound_rtol: f64,
    /// Largest accepted `identity_gap`.
    pub gap_tol: f64,
}

impl Default for TaylorOptions {
    fn default() -> Self {
        TaylorOptions {
            max_level: 16,
            summability_tol: 1e-4,
            scan_h_max: 0.25,
            scan_density: 256.0,
            bound_rtol: 1e-8,
            gap_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorTerm {
    pub order: usize,
    /// `D_+^j F(a)`.
    pub derivative: f64,
    /// `(b - a)^j / j!`.
    pub weight: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub a: f64,
    pub b: f64,
    pub order: usize,
    pub terms: Vec<TaylorTerm>,
    pub integral: f64,
    pub integral_converged: bool,
    /// `I(F; a, b) - sum of terms`.
    pub remainder: f64,
    /// `(b - a)^k / k! * sup |F^k|` over `[a, b]`.
    pub remainder_bound: f64,
    pub ratio_sup: f64,
    pub ratio_inf: f64,
    /// Distance of the remainder from `(b - a)^k / k! * [inf F^k, sup F^k]`.
    pub identity_gap: f64,
    pub within_bound: bool,
    /// Every lower-order right derivative exists at `a`.
    pub applicable: bool,
    pub success: bool,
    pub note: Option<String>,
}

/// Checks the expansion
/// `I(F; a, b) = sum_{j<k} (b - a)^j / j! D_+^j F(a) + remainder`
/// with the remainder controlled by the k-th incremental ratios on `[a, b]`.
///
/// Missing lower-order derivatives make the report not applicable rather
/// than an error.
pub fn taylor_check(f: &TwoIndexFn, a: f64, b: f64, k: usize, opts: &TaylorOptions) -> Result<ExpansionReport> {
    if k == 0 {
        return Err(Error::invalid("expansion order must be at least 1"));
    }
    if !(a < b) {
        return Err(Error::invalid(format!("empty interval: a = {a} >= b = {b}")));
    }
    let limit = summability_limit(f, a, b, &RefinementScheme::Dyadic { max_level: opts.max_level }, opts.summability_tol)?;
    let schedule = default_schedule(24);
    let mut terms = Vec::with_capacity(k.saturating_sub(1));
    let mut missing = Vec::new();
    let mut weight = 1.0;
    for j in 1..k {
        weight *= (b - a) / j as f64;
        let d = approx_derivative_of(f, j, a, &schedule)?;
        if !d.exists {
            missing.push(j);
        }
        terms.push(TaylorTerm { order: j, derivative: d.value, weight, value: weight * d.value });
    }
    let top_weight = weight * (b - a) / k as f64;
    let scan = lipschitz_scan(f, k, (a, b), opts.scan_h_max.min(b - a), opts.scan_density)?;
    let remainder = limit.estimate - terms.iter().map(|t| t.value).sum::<f64>();
    let remainder_bound = top_weight * scan.trace.iter().map(|e| e.sup_abs).fold(0.0, f64::max);
    let (lo, hi) = (top_weight * scan.inf, top_weight * scan.sup);
    let identity_gap = if remainder < lo { lo - remainder } else if remainder > hi { remainder - hi } else { 0.0 };
    let within_bound = remainder.abs() <= remainder_bound * (1.0 + opts.bound_rtol) + opts.bound_rtol;
    let applicable = missing.is_empty() && !scan.failed;
    let note = if !missing.is_empty() {
        Some(format!("no right derivative of order {missing:?} at a"))
    } else if scan.failed {
        Some("order-k ratio scan hit NaN".into())
    } else {
        None
    };
    Ok(ExpansionReport {
        a,
        b,
        order: k,
        terms,
        integral: limit.estimate,
        integral_converged: limit.converged,
        remainder,
        remainder_bound,
        ratio_sup: scan.sup,
        ratio_inf: scan.inf,
        identity_gap,
        within_bound,
        applicable,
        success: applicable && limit.converged && within_bound && identity_gap <= opts.gap_tol,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::FnSpec;

    fn check(spec: FnSpec, a: f64, b: f64, k: usize) -> ExpansionReport {
        taylor_check(&TwoIndexFn::hat(&spec.build().unwrap()), a, b, k, &TaylorOptions::default()).unwrap()
    }

    #[test]
    fn cubic_on_unit_interval() {
        let r = check(FnSpec::Cube, 0.0, 1.0, 3);
        assert_eq!(r.terms.len(), 2);
        assert!(r.terms.iter().all(|t| t.value.abs() < 1e-12));
        assert!((r.remainder - 1.0).abs() < 1e-12);
        assert!((r.remainder_bound - 1.0).abs() < 1e-9);
        assert!(r.within_bound && r.success, "{r:?}");
    }

    #[test]
    fn square_on_zero_two() {
        let r = check(FnSpec::Square, 0.0, 2.0, 2);
        assert_eq!(r.terms[0].value, 0.0);
        assert_eq!(r.remainder, 4.0);
        assert_eq!(r.remainder_bound, 4.0);
        assert!(r.success);
    }

    #[test]
    fn x_abs_x_half_on_unit_interval() {
        let r = check(FnSpec::XAbsXHalf, 0.0, 1.0, 2);
        assert_eq!(r.terms[0].value, 0.0);
        assert_eq!(r.remainder, 0.5);
        assert!((r.remainder_bound - 0.5).abs() < 1e-12);
        assert!(r.within_bound && r.success);
    }

    #[test]
    fn polynomial_gap_vanishes() {
        let p = FnSpec::Polynomial { coeffs: vec![0.5, -1.0, 2.0, 0.25, -0.75] };
        let r = check(p, -0.3, 0.8, 4);
        assert!(r.identity_gap < 1e-10, "{r:?}");
        assert!(r.success);
    }

    #[test]
    fn too_low_order_leaves_a_gap() {
        // x^4 with k = 2: the remainder is not w * F^2 for a constant F^2, but it is
        // still inside w * [inf F^2, sup F^2]
        let r = check(FnSpec::Quartic, 0.0, 1.0, 2);
        assert!(r.within_bound);
        assert!(r.identity_gap == 0.0);
    }

    #[test]
    fn missing_derivative_is_not_applicable() {
        let r = check(FnSpec::XSinInvX, 0.0, 1.0, 2);
        assert!(!r.applicable && !r.success && r.note.is_some());
    }
}
