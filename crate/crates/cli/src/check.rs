use std::fmt;

use serde::{Deserialize, Serialize};

/// One PASS/FAIL row of a summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(label: impl Into<String>, value: f64, pass: bool) -> Self {
        Check { label: label.into(), value, pass }
    }

    /// Passes when `value <= limit`; NaN fails.
    pub fn at_most(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Check::new(label, value, value <= limit)
    }

    /// Passes when `value >= limit`; NaN fails.
    pub fn at_least(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Check::new(label, value, value >= limit)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.label, if self.pass { "PASS" } else { "FAIL" })
    }
}

/// `3.3e-15`, `0.0e+00`: one decimal, signed two-digit exponent.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.1e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

/// Plain decimal with float noise (`0.9500000000000001`) trimmed.
pub fn short(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

/// `E[QV]₁`-style time subscript.
pub fn subscript(t: f64) -> String {
    if t >= 0.0 && t.fract() == 0.0 && t < 1e9 {
        format!("{}", t as u64).chars().map(|c| char::from_u32('₀' as u32 + c.to_digit(10).unwrap()).unwrap()).collect()
    } else {
        format!("_{}", short(t))
    }
}
