use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shared, thread-safe real function.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A declared Lipschitz constant on a closed interval (endpoints may be infinite).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzBound {
    pub lo: f64,
    pub hi: f64,
    pub constant: f64,
}

/// A real function together with optional declared right derivatives and
/// Lipschitz constants.
///
/// Declared derivatives are the one-sided right derivatives `D_+^j f`; at a
/// kink they pick the right-hand value, which is what the vanishing-increment
/// incremental ratios converge to.
#[derive(Clone)]
pub struct ScalarFn {
    eval: RealFn,
    derivatives: Vec<(u32, RealFn)>,
    lipschitz: Vec<LipschitzBound>,
    label: String,
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFn")
            .field("label", &self.label)
            .field("derivative_orders", &self.derivatives.iter().map(|(j, _)| *j).collect::<Vec<_>>())
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl ScalarFn {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFn { eval: Arc::new(f), derivatives: Vec::new(), lipschitz: Vec::new(), label: label.into() }
    }

    /// Declares the right derivative of order `order` (replacing a previous one).
    pub fn with_derivative(mut self, order: u32, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        assert!(order >= 1, "derivative order starts at 1");
        self.derivatives.retain(|(j, _)| *j != order);
        self.derivatives.push((order, Arc::new(d)));
        self.derivatives.sort_by_key(|(j, _)| *j);
        self
    }

    pub fn with_lipschitz(mut self, lo: f64, hi: f64, constant: f64) -> Self {
        assert!(lo <= hi && constant >= 0.0, "lipschitz bound needs lo <= hi and L >= 0");
        self.lipschitz.push(LipschitzBound { lo, hi, constant });
        self
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn as_fn(&self) -> RealFn {
        Arc::clone(&self.eval)
    }

    pub fn derivative(&self, order: u32) -> Option<RealFn> {
        self.derivatives.iter().find(|(j, _)| *j == order).map(|(_, d)| Arc::clone(d))
    }

    /// The declared right derivative of order `order` as a function in its own
    /// right, with the higher declared orders shifted down.
    pub fn derivative_fn(&self, order: u32) -> Option<ScalarFn> {
        let d = self.derivative(order)?;
        let mut out = ScalarFn { eval: d, derivatives: Vec::new(), lipschitz: Vec::new(), label: format!("D{order}({})", self.label) };
        for (j, dj) in &self.derivatives {
            if *j > order {
                out.derivatives.push((j - order, Arc::clone(dj)));
            }
        }
        Some(out)
    }

    pub fn declared_orders(&self) -> Vec<u32> {
        self.derivatives.iter().map(|(j, _)| *j).collect()
    }

    pub fn lipschitz_bounds(&self) -> &[LipschitzBound] {
        &self.lipschitz
    }

    /// Smallest declared Lipschitz constant valid on all of `[lo, hi]`.
    pub fn lipschitz_on(&self, lo: f64, hi: f64) -> Option<f64> {
        self.lipschitz
            .iter()
            .filter(|b| b.lo <= lo && hi <= b.hi)
            .map(|b| b.constant)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Pointwise scaling `c * f`, carrying declared derivatives and bounds along.
    pub fn scaled(&self, c: f64) -> ScalarFn {
        let f = Arc::clone(&self.eval);
        let mut out = ScalarFn::new(format!("{}*({})", c, self.label), move |x| c * f(x));
        for (j, d) in &self.derivatives {
            let d = Arc::clone(d);
            out = out.with_derivative(*j, move |x| c * d(x));
        }
        for b in &self.lipschitz {
            out = out.with_lipschitz(b.lo, b.hi, b.constant * c.abs());
        }
        out
    }
}

/// Right-continuous sign: `+1` on `[0, inf)`, `-1` on `(-inf, 0)`.
///
/// This is the right derivative of `|x|`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Catalog of named scalar functions, as they appear in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum FnSpec {
    /// `x`
    Identity,
    /// `|x|`
    Abs,
    /// `-|x|` (concave)
    NegAbs,
    /// `x^2`
    Square,
    /// `x^3`
    Cube,
    /// `x^4`
    Quartic,
    /// `x|x|/2`, a C^1 function with Lipschitz derivative `|x|`.
    XAbsXHalf,
    /// Right-continuous sign.
    Sign,
    /// `-sign(x)`
    NegSign,
    /// `|x - shift|`, the primitive of `sign(x - shift)`.
    SignPrimitive {
        #[serde(default)]
        shift: f64,
    },
    /// Continuous piecewise-linear function: `value_at_zero` at 0, slope
    /// `slopes[i]` on the i-th piece delimited by the sorted `breakpoints`
    /// (`slopes.len() == breakpoints.len() + 1`).
    PiecewiseLinear {
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        #[serde(default)]
        value_at_zero: f64,
    },
    /// `sum_i coeffs[i] x^i`
    Polynomial { coeffs: Vec<f64> },
    Cos,
    Sin,
    /// `x sin(1/x)` extended by 0 at the origin (continuous, infinite variation near 0).
    XSinInvX,
}

impl FnSpec {
    /// Names accepted in configs, for `catalog` listings.
    pub const NAMES: &'static [&'static str] = &[
        "identity",
        "abs",
        "neg_abs",
        "square",
        "cube",
        "quartic",
        "x_abs_x_half",
        "sign",
        "neg_sign",
        "sign_primitive",
        "piecewise_linear",
        "polynomial",
        "cos",
        "sin",
        "x_sin_inv_x",
    ];

    /// Whether the function is convex on the whole line.
    pub fn is_convex(&self) -> bool {
        match self {
            FnSpec::Identity | FnSpec::Abs | FnSpec::Square | FnSpec::Quartic | FnSpec::SignPrimitive { .. } => true,
            FnSpec::PiecewiseLinear { slopes, .. } => slopes.windows(2).all(|w| w[0] <= w[1]),
            _ => false,
        }
    }

    /// Points where the function (or its first derivative) is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            FnSpec::Abs | FnSpec::NegAbs | FnSpec::XAbsXHalf | FnSpec::Sign | FnSpec::NegSign | FnSpec::XSinInvX => {
                vec![0.0]
            }
            FnSpec::SignPrimitive { shift } => vec![*shift],
            FnSpec::PiecewiseLinear { breakpoints, .. } => breakpoints.clone(),
            _ => Vec::new(),
        }
    }

    pub fn build(&self) -> Result<ScalarFn> {
        const INF: f64 = f64::INFINITY;
        let f = match self {
            FnSpec::Identity => ScalarFn::new("identity", |x| x)
                .with_derivative(1, |_| 1.0)
                .with_derivative(2, |_| 0.0)
                .with_lipschitz(-INF, INF, 1.0),
            FnSpec::Abs => ScalarFn::new("abs", f64::abs)
                .with_derivative(1, sign)
                .with_derivative(2, |_| 0.0)
                .with_lipschitz(-INF, INF, 1.0),
            FnSpec::NegAbs => ScalarFn::new("neg_abs", |x: f64| -x.abs())
                .with_derivative(1, |x| -sign(x))
                .with_derivative(2, |_| 0.0)
                .with_lipschitz(-INF, INF, 1.0),
            FnSpec::Square => ScalarFn::new("square", |x| x * x)
                .with_derivative(1, |x| 2.0 * x)
                .with_derivative(2, |_| 2.0)
                .with_derivative(3, |_| 0.0),
            FnSpec::Cube => ScalarFn::new("cube", |x| x * x * x)
                .with_derivative(1, |x| 3.0 * x * x)
                .with_derivative(2, |x| 6.0 * x)
                .with_derivative(3, |_| 6.0),
            FnSpec::Quartic => ScalarFn::new("quartic", |x| (x * x) * (x * x))
                .with_derivative(1, |x| 4.0 * x * x * x)
                .with_derivative(2, |x| 12.0 * x * x)
                .with_derivative(3, |x| 24.0 * x)
                .with_derivative(4, |_| 24.0),
            FnSpec::XAbsXHalf => ScalarFn::new("x_abs_x_half", |x: f64| 0.5 * x * x.abs())
                .with_derivative(1, f64::abs)
                .with_derivative(2, sign),
            FnSpec::Sign => ScalarFn::new("sign", sign),
            FnSpec::NegSign => ScalarFn::new("neg_sign", |x| -sign(x)),
            FnSpec::SignPrimitive { shift } => {
                let c = *shift;
                if !c.is_finite() {
                    return Err(Error::invalid("sign_primitive shift must be finite"));
                }
                ScalarFn::new(format!("sign_primitive({c})"), move |x: f64| (x - c).abs())
                    .with_derivative(1, move |x| sign(x - c))
                    .with_derivative(2, |_| 0.0)
                    .with_lipschitz(-INF, INF, 1.0)
            }
            FnSpec::PiecewiseLinear { breakpoints, slopes, value_at_zero } => {
                piecewise_linear(breakpoints.clone(), slopes.clone(), *value_at_zero)?
            }
            FnSpec::Polynomial { coeffs } => polynomial(coeffs.clone())?,
            FnSpec::Cos => ScalarFn::new("cos", f64::cos)
                .with_derivative(1, |x: f64| -x.sin())
                .with_derivative(2, |x: f64| -x.cos())
                .with_derivative(3, f64::sin)
                .with_derivative(4, f64::cos)
                .with_lipschitz(-INF, INF, 1.0),
            FnSpec::Sin => ScalarFn::new("sin", f64::sin)
                .with_derivative(1, f64::cos)
                .with_derivative(2, |x: f64| -x.sin())
                .with_derivative(3, |x: f64| -x.cos())
                .with_lipschitz(-INF, INF, 1.0),
            FnSpec::XSinInvX => {
                ScalarFn::new("x_sin_inv_x", |x: f64| if x == 0.0 { 0.0 } else { x * (1.0 / x).sin() })
            }
        };
        Ok(f)
    }
}

fn piecewise_linear(breakpoints: Vec<f64>, slopes: Vec<f64>, value_at_zero: f64) -> Result<ScalarFn> {
    if slopes.len() != breakpoints.len() + 1 {
        return Err(Error::invalid("piecewise_linear needs slopes.len() == breakpoints.len() + 1"));
    }
    if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().chain(&slopes).any(|v| !v.is_finite()) {
        return Err(Error::invalid("piecewise_linear breakpoints must be finite and strictly increasing"));
    }
    // Piece i covers [knot_{i-1}, knot_i); anchor each piece at a point where
    // its value is known so evaluation is a single multiply-add.
    let piece = {
        let bp = breakpoints.clone();
        move |x: f64| bp.partition_point(|&b| b <= x)
    };
    let zero_piece = piece(0.0);
    let mut anchors = vec![(0.0, value_at_zero); slopes.len()];
    // walk right from the piece containing 0
    let mut x0 = 0.0;
    let mut v0 = value_at_zero;
    for i in zero_piece..slopes.len() {
        anchors[i] = (x0, v0);
        if i < breakpoints.len() {
            v0 += slopes[i] * (breakpoints[i] - x0);
            x0 = breakpoints[i];
        }
    }
    let (mut x0, mut v0) = (0.0, value_at_zero);
    for i in (0..zero_piece).rev() {
        // piece i ends at breakpoints[i]
        v0 -= slopes[i + 1] * (x0 - breakpoints[i]);
        x0 = breakpoints[i];
        anchors[i] = (x0, v0);
    }
    let label = format!("piecewise_linear({:?}; {:?})", breakpoints, slopes);
    let max_slope = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let (pe, se) = (piece.clone(), slopes.clone());
    let f = move |x: f64| {
        let i = pe(x);
        let (a, v) = anchors[i];
        v + se[i] * (x - a)
    };
    let sd = slopes.clone();
    Ok(ScalarFn::new(label, f)
        .with_derivative(1, move |x| sd[piece(x)])
        .with_derivative(2, |_| 0.0)
        .with_lipschitz(f64::NEG_INFINITY, f64::INFINITY, max_slope))
}

fn polynomial(coeffs: Vec<f64>) -> Result<ScalarFn> {
    if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("polynomial needs at least one finite coefficient"));
    }
    fn horner(c: &[f64], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }
    fn differentiate(c: &[f64]) -> Vec<f64> {
        if c.len() <= 1 {
            return vec![0.0];
        }
        c.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect()
    }
    let label = format!("polynomial({:?})", coeffs);
    let c0 = coeffs.clone();
    let mut f = ScalarFn::new(label, move |x| horner(&c0, x));
    let mut d = coeffs;
    for order in 1..=4 {
        d = differentiate(&d);
        let dc = d.clone();
        f = f.with_derivative(order, move |x| horner(&dc, x));
    }
    Ok(f)
}
