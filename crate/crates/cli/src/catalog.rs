use std::fmt::Write as _;

use pathcalc_core::compensator::catalog_pairs;
use pathcalc_core::{FnSpec, PathModel};

use crate::config::ExperimentKind;

/// Names accepted in configs, as printed by `pathcalc catalog`.
pub fn listing() -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment kinds:");
    for k in ExperimentKind::ALL {
        let _ = writeln!(s, "  {:<13} {}", k.name(), k.describe());
    }
    let _ = writeln!(s, "functions (\"functions\": [{{\"name\": ...}}]):");
    for name in FnSpec::NAMES {
        let _ = writeln!(s, "  {name}");
    }
    let _ = writeln!(s, "path models (\"model\": {{\"kind\": ...}}):");
    for kind in PathModel::KINDS {
        let _ = writeln!(s, "  {kind}");
    }
    let _ = writeln!(s, "jump laws: two_point, uniform, normal");
    let _ = writeln!(s, "increasing processes: poisson_counting, compound_poisson_increasing, path_qv, deterministic");
    let _ = writeln!(s, "test processes: constant, indicator, state_function");
    let _ = writeln!(s, "default compensator pairs:");
    for (m, y) in catalog_pairs() {
        let _ = writeln!(s, "  {} × {}", m.label(), y.label());
    }
    let _ = writeln!(s, "negative controls: flipped_integrand (ito, tanaka), wrong_intensity {{factor}} (compensator)");
    s
}
