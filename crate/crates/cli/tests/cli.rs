use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn pathcalc(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pathcalc"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    pathcalc(&args, &[])
}

const QV: &str = r#"{
  "schema_version": 1,
  "kind": "qv",
  "model": {"kind": "brownian_motion", "sigma": 1.0},
  "levels": [8, 9, 10, 11, 12],
  "n_paths": 1000,
  "seeds": {"base": 1, "count": 1}
}"#;

const ITO_SQUARE: &str = r#"{
  "schema_version": 1,
  "kind": "ito",
  "functions": [{"name": "square"}],
  "levels": [6, 8],
  "n_paths": 40,
  "seeds": {"base": 4, "count": 1}
}"#;

const TANAKA_FLIPPED: &str = r#"{
  "schema_version": 1,
  "kind": "tanaka",
  "functions": [{"name": "abs"}],
  "levels": [12, 14],
  "n_paths": 20,
  "seeds": {"base": 1, "count": 1},
  "negative_control": {"kind": "flipped_integrand"}
}"#;

#[test]
fn qv_run_reports_the_band_row_and_writes_the_layout() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "qv.json", QV);
    let out = tmp.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("E[QV]₁ ∈ [0.95,1.05]: PASS"), "{}", stdout(&o));
    let seed_dir = out.join("qv").join("1");
    for f in ["paths.csv", "report.json", "summary.txt"] {
        assert!(seed_dir.join(f).is_file(), "missing {f}");
    }
    assert!(out.join("qv").join("aggregate.json").is_file());
    let csv = fs::read_to_string(seed_dir.join("paths.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1001);
    assert!(fs::read_to_string(seed_dir.join("summary.txt")).unwrap().contains("E[QV]₁ ∈ [0.95,1.05]: PASS"));

    // replay of a fresh report gives the same rows and verdict
    let r = pathcalc(&["replay", seed_dir.to_str().unwrap()], &[]);
    assert_eq!(code(&r), 0, "{}", stdout(&r));
    assert!(stdout(&r).contains("E[QV]₁ ∈ [0.95,1.05]: PASS"));
    assert!(!stdout(&r).contains("differs"));
}

#[test]
fn ito_square_has_a_zero_residual_row() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "ito.json", ITO_SQUARE);
    let o = run(&cfg, &tmp.path().join("out"), &[]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.starts_with("max residual ")).expect("residual row");
    assert!(row.ends_with(": PASS"), "{row}");
    let value: f64 = row["max residual ".len()..row.len() - ": PASS".len()].parse().unwrap();
    // b^2 - a^2 - 2a(b - a) - (b - a)^2 vanishes up to rounding only
    assert!(value <= 1e-12, "{row}");
}

#[test]
fn flipped_integrand_emits_fail_rows_and_exit_1() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "t.json", TANAKA_FLIPPED);
    let o = run(&cfg, &tmp.path().join("out"), &[]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("min A^c increment") && l.ends_with(": FAIL")), "{text}");
    assert!(text.contains("verdict FAIL"));

    // the same config without the corruption passes at the resolution the oracle tolerance is set for
    let honest = write_config(tmp.path(), "h.json", &TANAKA_FLIPPED.replace(",\n  \"negative_control\": {\"kind\": \"flipped_integrand\"}", ""));
    let o = run(&honest, &tmp.path().join("out2"), &["--paths", "300", "--level", "16"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn tampered_residual_flips_the_replayed_verdict() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "ito.json", ITO_SQUARE);
    let out = tmp.path().join("out");
    assert_eq!(code(&run(&cfg, &out, &[])), 0);
    let seed_dir = out.join("ito").join("4");
    assert_eq!(code(&pathcalc(&["replay", seed_dir.to_str().unwrap()], &[])), 0);

    let csv_path = seed_dir.join("paths.csv");
    let csv = fs::read_to_string(&csv_path).unwrap();
    let mut lines: Vec<String> = csv.lines().map(str::to_string).collect();
    let col = lines[0].split(',').position(|h| h == "residual").unwrap();
    let last = lines.len() - 1;
    let mut cells: Vec<String> = lines[last].split(',').map(str::to_string).collect();
    cells[col] = "0.5".into();
    lines[last] = cells.join(",");
    fs::write(&csv_path, lines.join("\n") + "\n").unwrap();

    let r = pathcalc(&["replay", seed_dir.to_str().unwrap()], &[]);
    assert_eq!(code(&r), 1, "{}", stdout(&r));
    assert!(stdout(&r).contains("max residual 5.0e-01: FAIL"), "{}", stdout(&r));
    assert!(stdout(&r).contains("recorded verdict PASS differs"), "{}", stdout(&r));
}

#[test]
fn missing_or_malformed_artifacts_exit_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "ito.json", ITO_SQUARE);
    let out = tmp.path().join("out");
    assert_eq!(code(&run(&cfg, &out, &[])), 0);
    let seed_dir = out.join("ito").join("4");

    assert_eq!(code(&pathcalc(&["replay", tmp.path().join("nowhere").to_str().unwrap()], &[])), 2);
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(code(&pathcalc(&["replay", empty.to_str().unwrap()], &[])), 2);

    let report = fs::read_to_string(seed_dir.join("report.json")).unwrap();
    fs::write(seed_dir.join("report.json"), report.replacen("\"schema_version\": 1", "\"schema_version\": 7", 1)).unwrap();
    let r = pathcalc(&["replay", seed_dir.to_str().unwrap()], &[]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("schema"));
    fs::write(seed_dir.join("report.json"), report).unwrap();

    fs::remove_file(seed_dir.join("paths.csv")).unwrap();
    let r = pathcalc(&["replay", seed_dir.to_str().unwrap()], &[]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("paths.csv"));
}

#[test]
fn config_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cases = [
        ("no_schema.json", QV.replace("\"schema_version\": 1,", "")),
        ("bad_schema.json", QV.replace("\"schema_version\": 1", "\"schema_version\": 99")),
        ("unknown_fn.json", ITO_SQUARE.replace("square", "tangent")),
        ("no_levels.json", QV.replace("[8, 9, 10, 11, 12]", "[]")),
        ("not_json.json", "{".to_string()),
        // |x| has no bounded second ratios, so the Ito hypotheses are not met
        ("ito_abs.json", ITO_SQUARE.replace("square", "abs")),
    ];
    for (name, json) in cases {
        let cfg = write_config(tmp.path(), name, &json);
        let o = run(&cfg, &out, &[]);
        assert_eq!(code(&o), 2, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(code(&run(&tmp.path().join("absent.json"), &out, &[])), 2);

    // output root is a regular file
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let cfg = write_config(tmp.path(), "qv.json", QV);
    assert_eq!(code(&run(&cfg, &blocker, &["--paths", "5"])), 2);
}

#[test]
fn same_config_and_seed_give_byte_identical_json() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "ito.json", &ITO_SQUARE.replace("\"count\": 1", "\"count\": 3"));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&run(&cfg, &a, &[])), 0);
    assert_eq!(code(&pathcalc(&["run", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()], &[("PATHCALC_THREADS", "1")])), 0);
    for rel in ["ito/4/report.json", "ito/5/paths.csv", "ito/6/report.json", "ito/aggregate.json"] {
        assert_eq!(fs::read(a.join(rel)).unwrap(), fs::read(b.join(rel)).unwrap(), "{rel}");
    }
}

#[test]
fn flags_override_the_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "qv.json", QV);
    let out = tmp.path().join("out");
    let o = run(&cfg, &out, &["--seed", "42", "--paths", "30", "--level", "7"]);
    assert!(matches!(code(&o), 0 | 1), "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out.join("qv").join("42").join("report.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(doc["seed"], 42);
    assert_eq!(doc["config"]["n_paths"], 30);
    assert_eq!(doc["config"]["levels"], serde_json::json!([3, 4, 5, 6, 7]));
    assert_eq!(fs::read_to_string(out.join("qv").join("42").join("paths.csv")).unwrap().lines().count(), 31);
}

#[test]
fn wrong_intensity_control_fails() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{
  "schema_version": 1,
  "kind": "compensator",
  "levels": [6],
  "n_paths": 4000,
  "seeds": {"base": 7, "count": 1},
  "pairs": [{"model": {"kind": "poisson_counting", "rate": 3.0}, "test_process": {"kind": "constant", "value": 1.0}}],
  "negative_control": {"kind": "wrong_intensity", "factor": 1.5}
}"#,
    );
    let o = run(&cfg, &tmp.path().join("out"), &[]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains(": FAIL"));
}

#[test]
fn catalog_lists_configurable_names() {
    let o = pathcalc(&["catalog"], &[]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for name in ["x_abs_x_half", "jump_diffusion", "tanaka", "poisson_counting", "flipped_integrand"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&pathcalc(&["frobnicate"], &[])), 2);
    assert_eq!(code(&pathcalc(&["run"], &[])), 2);
}
