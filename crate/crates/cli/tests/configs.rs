use std::path::Path;

use pathcalc_cli::{ExperimentConfig, ExperimentKind};

#[test]
fn shipped_configs_are_valid_and_cover_every_kind() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut kinds = Vec::new();
    for entry in std::fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "json") {
            let cfg = ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            kinds.push(cfg.kind);
        }
    }
    for k in ExperimentKind::ALL {
        assert!(kinds.contains(&k), "no shipped config for {}", k.name());
    }
}
