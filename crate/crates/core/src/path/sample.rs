use std::io::{Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::model::{poisson_events, PathModel};
use crate::error::{Error, Result};
use crate::rng::path_rng;

/// A jump of the path at grid point `index`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub index: usize,
    pub time: f64,
    pub size: f64,
}

/// A discretised càdlàg trajectory.
///
/// `values[i]` is `X` at `times[i]` (right-continuous), `pre_values[i]` the left
/// limit `X_{t-}`. The two differ exactly at the indices listed in `jumps`,
/// where `values[i] == pre_values[i] + size` holds bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    horizon: f64,
    times: Vec<f64>,
    values: Vec<f64>,
    pre_values: Vec<f64>,
    jumps: Vec<Jump>,
    model: Option<PathModel>,
    seed: Option<u64>,
}

/// Values of jump-bearing paths are multiples of this step.
pub const VALUE_QUANTUM: f64 = 1.0 / (1u64 << 40) as f64;
/// Bound on `|X|` for jump-bearing paths, so that lattice sums stay exact.
pub const VALUE_LIMIT: f64 = 4096.0;

fn quantize(x: f64) -> Result<f64> {
    if !(x.abs() < VALUE_LIMIT) {
        return Err(Error::NumericRange(format!("path value {x} leaves (-{VALUE_LIMIT}, {VALUE_LIMIT})")));
    }
    Ok((x / VALUE_QUANTUM).round() * VALUE_QUANTUM)
}

/// Simulates `model` on `n_steps` uniform cells of `[0, horizon]`.
///
/// Jump times are inserted as extra grid points. The continuous part gets an
/// independent Gaussian increment on every cell of the merged grid, so the
/// path is an exact sample of the model at its grid points. For jump-bearing
/// models the continuous part and each jump size are rounded to multiples of
/// [`VALUE_QUANTUM`], which makes every later add/subtract of jump sums exact.
pub fn simulate(model: &PathModel, n_steps: usize, horizon: f64, seed: u64) -> Result<SamplePath> {
    model.validate()?;
    if n_steps == 0 {
        return Err(Error::invalid("n_steps must be at least 1"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::invalid(format!("horizon must be positive and finite, got {horizon}")));
    }
    let mut rng = path_rng(seed);
    let events = match model.jump_law() {
        Some(law) => poisson_events(&mut rng, model.jump_rate(), horizon, &law),
        None => Vec::new(),
    };

    // merge the uniform grid with the event times
    let mut times = Vec::with_capacity(n_steps + 1 + events.len());
    let mut jump_at: Vec<(usize, f64)> = Vec::with_capacity(events.len());
    let mut ev = events.iter().peekable();
    for i in 0..=n_steps {
        let t = horizon * (i as f64 / n_steps as f64);
        while let Some(&&(te, size)) = ev.peek() {
            if te < t {
                times.push(te);
                jump_at.push((times.len() - 1, size));
                ev.next();
            } else if te == t {
                jump_at.push((times.len(), size));
                ev.next();
            } else {
                break;
            }
        }
        times.push(t);
    }
    jump_at.dedup_by(|b, a| {
        let same = a.0 == b.0;
        if same {
            a.1 += b.1;
        }
        same
    });

    let (sigma, drift, start) = match *model {
        PathModel::BrownianMotion { sigma, drift, start } | PathModel::JumpDiffusion { sigma, drift, start, .. } => (sigma, drift, start),
        PathModel::CompoundPoissonJumps { start, .. } => (0.0, 0.0, start),
        PathModel::FiniteVariation { .. } => (0.0, 0.0, 0.0),
    };
    let mut continuous = Vec::with_capacity(times.len());
    match model {
        PathModel::FiniteVariation { knots } => {
            continuous.extend(times.iter().map(|&t| interpolate(knots, t)));
        }
        _ => {
            let mut w = 0.0;
            continuous.push(start);
            for k in 1..times.len() {
                if sigma > 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    w += sigma * (times[k] - times[k - 1]).sqrt() * z;
                }
                continuous.push(start + drift * times[k] + w);
            }
        }
    }

    let n = times.len();
    let mut values = Vec::with_capacity(n);
    let mut pre_values = Vec::with_capacity(n);
    let mut jumps = Vec::with_capacity(jump_at.len());
    if model.has_jumps() {
        let mut cum = 0.0;
        let mut next = jump_at.iter().peekable();
        for (i, c) in continuous.iter().enumerate() {
            let base = quantize(*c)?;
            let pre = base + cum;
            if let Some(&&(j, size)) = next.peek() {
                if j == i {
                    let dq = quantize(size)?;
                    cum += dq;
                    jumps.push(Jump { index: i, time: times[i], size: dq });
                    next.next();
                }
            }
            let v = base + cum;
            if v.abs() >= VALUE_LIMIT {
                return Err(Error::NumericRange(format!("path value {v} leaves (-{VALUE_LIMIT}, {VALUE_LIMIT})")));
            }
            pre_values.push(pre);
            values.push(v);
        }
        // zero-size jumps after rounding are not jumps
        jumps.retain(|j| j.size != 0.0);
    } else {
        values = continuous;
        pre_values = values.clone();
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericRange("simulated path is not finite".into()));
    }
    Ok(SamplePath { horizon, times, values, pre_values, jumps, model: Some(model.clone()), seed: Some(seed) })
}

fn interpolate(knots: &[(f64, f64)], t: f64) -> f64 {
    let k = knots.partition_point(|(tk, _)| *tk <= t);
    if k == knots.len() {
        return knots[k - 1].1;
    }
    let (t0, x0) = knots[k - 1];
    let (t1, x1) = knots[k];
    x0 + (x1 - x0) * ((t - t0) / (t1 - t0))
}

impl SamplePath {
    /// Builds a path from explicit values and `(index, size)` jump marks.
    ///
    /// Left limits are `value - size` at marked indices. Times must start at 0
    /// and increase strictly; the horizon is the last time.
    pub fn from_values(times: Vec<f64>, values: Vec<f64>, jumps: &[(usize, f64)]) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::invalid("a path needs at least two (time, value) points"));
        }
        let mut pre_values = values.clone();
        let mut marks = Vec::with_capacity(jumps.len());
        for &(index, size) in jumps {
            if index == 0 || index >= times.len() {
                return Err(Error::invalid(format!("jump index {index} outside (0, {})", times.len())));
            }
            pre_values[index] = values[index] - size;
            marks.push(Jump { index, time: times[index], size });
        }
        marks.sort_by_key(|j| j.index);
        let path = SamplePath { horizon: *times.last().unwrap(), times, values, pre_values, jumps: marks, model: None, seed: None };
        path.validate()?;
        Ok(path)
    }

    pub(crate) fn from_parts(
        times: Vec<f64>,
        values: Vec<f64>,
        pre_values: Vec<f64>,
        jumps: Vec<Jump>,
        model: Option<PathModel>,
        seed: Option<u64>,
    ) -> Self {
        let horizon = *times.last().expect("non-empty path");
        SamplePath { horizon, times, values, pre_values, jumps, model, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.times[0] != 0.0 {
            return Err(Error::invalid("path times must start at 0"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("path times must increase strictly"));
        }
        if self.values.iter().chain(&self.pre_values).chain(&self.times).any(|v| !v.is_finite()) {
            return Err(Error::invalid("path contains non-finite entries"));
        }
        if self.jumps.windows(2).any(|w| w[1].index <= w[0].index) {
            return Err(Error::invalid("duplicate jump index"));
        }
        let mut k = 0;
        for i in 0..self.len() {
            let marked = k < self.jumps.len() && self.jumps[k].index == i;
            if marked {
                let j = self.jumps[k];
                if self.values[i] != self.pre_values[i] + j.size {
                    return Err(Error::invalid(format!("value at jump index {i} is not pre_jump_value + jump_size")));
                }
                k += 1;
            } else if self.values[i] != self.pre_values[i] {
                return Err(Error::invalid(format!("pre_jump_value differs from value at unmarked index {i}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pre_values(&self) -> &[f64] {
        &self.pre_values
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn model(&self) -> Option<&PathModel> {
        self.model.as_ref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn value_at_index(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn jump_at(&self, index: usize) -> Option<&Jump> {
        self.jumps.binary_search_by_key(&index, |j| j.index).ok().map(|k| &self.jumps[k])
    }

    pub fn is_jump_index(&self, index: usize) -> bool {
        self.jump_at(index).is_some()
    }

    /// Last grid index with time `<= t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|s| *s <= t).saturating_sub(1)
    }

    /// `X_t` of the càdlàg step interpolation of the grid values.
    pub fn value_at(&self, t: f64) -> f64 {
        self.values[self.index_at(t)]
    }

    /// Mean `|X_{t_i} - X_{t_{i-1}-}|` over cells, i.e. without the jumps.
    pub fn mean_continuous_step(&self) -> f64 {
        let n = self.len() - 1;
        (1..=n).map(|i| (self.pre_values[i] - self.values[i - 1]).abs()).sum::<f64>() / n as f64
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().chain(&self.pre_values).copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().chain(&self.pre_values).copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes `time,value,pre_jump_value,jump_size` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut k = 0;
        for i in 0..self.len() {
            let size = if k < self.jumps.len() && self.jumps[k].index == i {
                k += 1;
                self.jumps[k - 1].size
            } else {
                0.0
            };
            wtr.serialize(PathRow { time: self.times[i], value: self.values[i], pre_jump_value: self.pre_values[i], jump_size: size })?;
        }
        wtr.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Csv(e.to_string()))
    }

    /// Reads rows written by [`SamplePath::write_csv`]. Rows with a nonzero
    /// `jump_size` become jumps. The result carries no model or seed.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let (mut times, mut values, mut pre_values, mut jumps) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (i, row) in rdr.deserialize::<PathRow>().enumerate() {
            let row = row?;
            if row.jump_size != 0.0 {
                jumps.push(Jump { index: i, time: row.time, size: row.jump_size });
            }
            times.push(row.time);
            values.push(row.value);
            pre_values.push(row.pre_jump_value);
        }
        if times.len() < 2 {
            return Err(Error::invalid("a path needs at least two rows"));
        }
        let path = SamplePath::from_parts(times, values, pre_values, jumps, None, None);
        path.validate()?;
        Ok(path)
    }

    /// Keeps model and seed, replaces the trajectory.
    pub(crate) fn with_trajectory(&self, values: Vec<f64>, pre_values: Vec<f64>, jumps: Vec<Jump>) -> Self {
        SamplePath { horizon: self.horizon, times: self.times.clone(), values, pre_values, jumps, model: self.model.clone(), seed: self.seed }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PathRow {
    time: f64,
    value: f64,
    pre_jump_value: f64,
    jump_size: f64,
}
