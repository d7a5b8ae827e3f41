use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pathcalc_core::compensator::{IncreasingProcessModel, TestProcess};
use pathcalc_core::{FnSpec, PathModel};

use crate::error::{CliError, Result};

/// Version of the config and report formats this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_OUT: &str = "results";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Summability,
    Taylor,
    Qv,
    Ito,
    Tanaka,
    Compensator,
    Independence,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Summability,
        ExperimentKind::Taylor,
        ExperimentKind::Qv,
        ExperimentKind::Ito,
        ExperimentKind::Tanaka,
        ExperimentKind::Compensator,
        ExperimentKind::Independence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Summability => "summability",
            ExperimentKind::Taylor => "taylor",
            ExperimentKind::Qv => "qv",
            ExperimentKind::Ito => "ito",
            ExperimentKind::Tanaka => "tanaka",
            ExperimentKind::Compensator => "compensator",
            ExperimentKind::Independence => "independence",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            ExperimentKind::Summability => "partition sums of f(y) - f(x) along a refining chain on an interval",
            ExperimentKind::Taylor => "k-th order expansion of a two-index functional with ratio-bounded remainder",
            ExperimentKind::Qv => "realized quadratic variation across dyadic levels",
            ExperimentKind::Ito => "pathwise Ito decomposition, residual held at zero",
            ExperimentKind::Tanaka => "pathwise Tanaka decomposition, residual checked as a continuous increasing process",
            ExperimentKind::Compensator => "E int Y dA against E int Y dA^p for increasing processes",
            ExperimentKind::Independence => "dyadic against hitting-time grid estimates of a pathwise sum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub base: u64,
    #[serde(default = "one")]
    pub count: usize,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds { base: 0, count: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Per-path algebraic identities.
    pub exact: f64,
    /// Relative half-width of the band around the expected bracket.
    pub qv_band: f64,
    /// Distance at which two estimates count as disagreeing.
    pub eps: f64,
    /// Largest accepted disagreement frequency between consecutive levels.
    pub delta: f64,
    /// Smallest accepted agreement frequency between grid schemes.
    pub agreement: f64,
    /// Relative L1 error of the Tanaka residual against the occupation oracle.
    pub tanaka_rel: f64,
    /// Largest accepted jump of the Tanaka residual.
    pub jump: f64,
    /// Half-width of the occupation window of the local-time oracle.
    pub oracle_eps: f64,
    /// Standard errors allowed between Monte Carlo estimates.
    pub se_multiplier: f64,
    /// Settling tolerance of refinement limits.
    pub summability: f64,
    /// Largest accepted Taylor identity gap.
    pub taylor_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exact: 1e-8,
            qv_band: 0.05,
            eps: 0.05,
            delta: 0.05,
            agreement: 0.95,
            tanaka_rel: 0.10,
            jump: 1e-3,
            oracle_eps: 0.01,
            se_multiplier: 3.0,
            summability: 1e-4,
            taylor_gap: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    #[default]
    Dyadic,
    RandomBisection,
}

/// Deliberate corruptions whose checks are expected to fail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NegativeControl {
    /// Integrate against `-g` instead of the derivative `g`.
    FlippedIntegrand,
    /// Scale the compensator intensity by `factor`.
    WrongIntensity { factor: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompensatorPair {
    pub model: IncreasingProcessModel,
    pub test_process: TestProcess,
}

/// One experiment, as read from a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Output directory name; defaults to the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub functions: Vec<FnSpec>,
    #[serde(default = "PathModel::standard_brownian")]
    pub model: PathModel,
    pub levels: Vec<u32>,
    pub n_paths: usize,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default = "unit")]
    pub horizon: f64,
    /// Time steps per simulated path; defaults to `2^max(levels)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    /// `(a, b)` for summability and taylor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<(f64, f64)>,
    /// Expansion order for taylor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    /// Value range the decomposition hypotheses are checked on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<(f64, f64)>,
    /// Hitting-time lattice spacings for independence, coarse to fine.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hitting_eps: Vec<f64>,
    #[serde(default)]
    pub refinement: Refinement,
    /// Compensator pairs; defaults to the built-in catalog.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<CompensatorPair>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative_control: Option<NegativeControl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

/// Command-line values that take precedence over the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    /// Finest level; the configured ladder is shifted to end there.
    pub level: Option<u32>,
    pub out: Option<PathBuf>,
}

/// Reads the `schema_version` of a JSON document before anything else.
pub fn check_schema(doc: &serde_json::Value) -> Result<()> {
    match doc.get("schema_version") {
        None => Err(CliError::Schema("missing `schema_version`".into())),
        Some(v) => match v.as_u64() {
            Some(v) if v == SCHEMA_VERSION as u64 => Ok(()),
            _ => Err(CliError::Schema(format!("unsupported schema_version {v} (this build reads {SCHEMA_VERSION})"))),
        },
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::config(format!("not valid JSON: {e}")))?;
        check_schema(&doc)?;
        let cfg: ExperimentConfig = serde_json::from_value(doc).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            CliError::Schema(msg) => CliError::Schema(format!("{}: {msg}", path.display())),
            e => e,
        })
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.seeds = Seeds { base: seed, count: 1 };
        }
        if let Some(n) = o.paths {
            self.n_paths = n;
        }
        if let Some(finest) = o.level {
            let top = self.max_level();
            let shift = finest as i64 - top as i64;
            self.levels = self.levels.iter().map(|&l| (l as i64 + shift).max(0) as u32).collect();
            self.levels.dedup();
            if let Some(n) = self.n_steps {
                if n < 1usize << finest.min(40) {
                    self.n_steps = None;
                }
            }
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        self.validate()
    }

    pub fn experiment(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.name().to_string())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    pub fn max_level(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps.unwrap_or(1usize << self.max_level())
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds.count as u64).map(|k| self.seeds.base.wrapping_add(k)).collect()
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval.unwrap_or((0.0, 1.0))
    }

    pub fn range(&self) -> (f64, f64) {
        self.range.unwrap_or((-16.0, 16.0))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!("unsupported schema_version {} (this build reads {SCHEMA_VERSION})", self.schema_version)));
        }
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
                return bad(format!("experiment name `{name}` is not a plain directory name"));
            }
        }
        if self.levels.is_empty() {
            return bad("levels must not be empty".into());
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return bad("levels must be strictly increasing".into());
        }
        if self.max_level() > 26 {
            return bad("levels are capped at 26".into());
        }
        if self.n_paths == 0 {
            return bad("n_paths must be at least 1".into());
        }
        if self.seeds.count == 0 {
            return bad("seeds.count must be at least 1".into());
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad("horizon must be positive".into());
        }
        if self.n_steps() == 0 {
            return bad("n_steps must be at least 1".into());
        }
        self.model.validate()?;
        for f in &self.functions {
            f.build()?;
        }
        let t = &self.tolerances;
        let positive = [t.exact, t.qv_band, t.eps, t.delta, t.tanaka_rel, t.jump, t.oracle_eps, t.se_multiplier, t.summability, t.taylor_gap];
        if positive.iter().any(|x| !(*x > 0.0 && x.is_finite())) || !(t.agreement > 0.0 && t.agreement <= 1.0) {
            return bad("tolerances must be positive and finite, agreement in (0, 1]".into());
        }

        use ExperimentKind as K;
        let needs_functions = matches!(self.kind, K::Summability | K::Taylor | K::Ito | K::Tanaka);
        if needs_functions && self.functions.is_empty() {
            return bad(format!("{} needs at least one entry in `functions`", self.kind.name()));
        }
        if matches!(self.kind, K::Summability | K::Taylor) {
            let (a, b) = self.interval();
            if !(a < b && a.is_finite() && b.is_finite()) {
                return bad(format!("interval ({a}, {b}) is empty"));
            }
        }
        if self.kind == K::Taylor && !matches!(self.order, Some(k) if k >= 1) {
            return bad("taylor needs `order` >= 1".into());
        }
        if matches!(self.kind, K::Ito | K::Tanaka) {
            let (lo, hi) = self.range();
            if !(lo < hi) {
                return bad(format!("range ({lo}, {hi}) is empty"));
            }
        }
        if self.kind == K::Independence {
            if self.levels.len() < 2 || self.hitting_eps.len() < 2 {
                return bad("independence needs at least two levels and two hitting_eps values".into());
            }
            if self.hitting_eps.iter().any(|e| !(*e > 0.0)) || self.hitting_eps.windows(2).any(|w| w[1] >= w[0]) {
                return bad("hitting_eps must be positive and strictly decreasing".into());
            }
            if self.functions.len() > 1 {
                return bad("independence takes at most one function".into());
            }
        }
        if self.kind == K::Compensator {
            if self.n_paths < 2 {
                return bad("compensator needs n_paths >= 2".into());
            }
            for p in self.pairs.iter().flatten() {
                p.model.validate()?;
            }
        }
        match (self.negative_control, self.kind) {
            (None, _) | (Some(NegativeControl::FlippedIntegrand), K::Ito | K::Tanaka) => {}
            (Some(NegativeControl::WrongIntensity { factor }), K::Compensator) => {
                if !(factor > 0.0 && factor.is_finite() && factor != 1.0) {
                    return bad("wrong_intensity factor must be positive and different from 1".into());
                }
            }
            (Some(c), k) => return bad(format!("negative control {c:?} does not apply to {}", k.name())),
        }
        Ok(())
    }
}
