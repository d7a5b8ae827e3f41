use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::riemann::GridScheme;

/// Which hypothesis a decomposition was built under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionMode {
    /// Bounded second incremental ratios: the residual should vanish.
    Ito,
    /// Lower-bounded second incremental ratios: the residual is a continuous
    /// increasing process.
    Tanaka,
}

/// Term series of `f(X_t) - f(X_0)` along a grid, one entry per grid point.
///
/// At every entry
/// `lhs = stochastic_integral + compensator_term + jump_term + residual + identity_gap`.
/// `compensator_term` integrates `c(X_{s-})` (half the second right derivative
/// of `f`) against the realised bracket of the continuous part;
/// `bracket_compensator` integrates it against the closed-form `<X^c>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub seed: Option<u64>,
    pub model: Option<String>,
    pub f_label: String,
    pub g_label: String,
    pub mode: DecompositionMode,
    pub grid: GridScheme,
    pub mesh: f64,
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub stochastic_integral: Vec<f64>,
    pub compensator_term: Vec<f64>,
    pub bracket_compensator: Vec<f64>,
    pub jump_term: Vec<f64>,
    pub residual: Vec<f64>,
    pub identity_gap: Vec<f64>,
    /// Entries of the series at which `X` jumps.
    pub jump_positions: Vec<usize>,
    /// Change of `residual` across each of those jumps.
    pub residual_jumps: Vec<f64>,
}

fn last(v: &[f64]) -> f64 {
    v.last().copied().unwrap_or(0.0)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl DecompositionReport {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_lhs(&self) -> f64 {
        last(&self.lhs)
    }

    pub fn final_stochastic_integral(&self) -> f64 {
        last(&self.stochastic_integral)
    }

    pub fn final_compensator(&self) -> f64 {
        last(&self.compensator_term)
    }

    pub fn final_bracket_compensator(&self) -> f64 {
        last(&self.bracket_compensator)
    }

    pub fn final_jump_term(&self) -> f64 {
        last(&self.jump_term)
    }

    pub fn final_residual(&self) -> f64 {
        last(&self.residual)
    }

    /// Realised minus closed-form compensator at the horizon.
    pub fn bracket_defect(&self) -> f64 {
        self.final_compensator() - self.final_bracket_compensator()
    }

    pub fn max_abs_residual(&self) -> f64 {
        max_abs(&self.residual)
    }

    pub fn max_abs_identity_gap(&self) -> f64 {
        max_abs(&self.identity_gap)
    }

    /// Smallest step of the residual between consecutive grid points.
    pub fn min_residual_increment(&self) -> f64 {
        self.residual.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Largest step of the residual between consecutive grid points.
    pub fn max_cell_increment(&self) -> f64 {
        self.residual.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
    }

    /// Largest change of the residual across a jump of `X`.
    pub fn max_residual_jump(&self) -> f64 {
        max_abs(&self.residual_jumps)
    }

    /// Entries at times `<= sigma`.
    pub fn truncated(&self, sigma: f64) -> DecompositionReport {
        let n = self.times.partition_point(|t| *t <= sigma);
        let cut = |v: &Vec<f64>| v[..n].to_vec();
        let keep: Vec<usize> = (0..self.jump_positions.len()).filter(|&k| self.jump_positions[k] < n).collect();
        DecompositionReport {
            times: cut(&self.times),
            lhs: cut(&self.lhs),
            stochastic_integral: cut(&self.stochastic_integral),
            compensator_term: cut(&self.compensator_term),
            bracket_compensator: cut(&self.bracket_compensator),
            jump_term: cut(&self.jump_term),
            residual: cut(&self.residual),
            identity_gap: cut(&self.identity_gap),
            jump_positions: keep.iter().map(|&k| self.jump_positions[k]).collect(),
            residual_jumps: keep.iter().map(|&k| self.residual_jumps[k]).collect(),
            ..self.clone()
        }
    }

    /// `time,lhs,stochastic_integral,compensator,bracket_compensator,jump_term,residual,identity_gap`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["time", "lhs", "stochastic_integral", "compensator", "bracket_compensator", "jump_term", "residual", "identity_gap"])?;
        for i in 0..self.len() {
            wtr.serialize((
                self.times[i],
                self.lhs[i],
                self.stochastic_integral[i],
                self.compensator_term[i],
                self.bracket_compensator[i],
                self.jump_term[i],
                self.residual[i],
                self.identity_gap[i],
            ))?;
        }
        wtr.flush().map_err(|e| Error::Csv(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are plain data")
    }
}
