use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("shubin-cli-test-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(dir: &Path, config: &str, extra: &[&str]) -> (i32, PathBuf) {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_shubin"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .env_remove("SHUBIN_OUT")
        .status()
        .unwrap();
    (status.code().unwrap_or(-1), out)
}

fn num(v: &Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}

#[test]
fn heat_trace_of_identity_matches_csch() {
    let dir = scratch("heat");
    let (code, out) = run(&dir, r#"{"task": "heat-trace", "n": 1}"#, &[]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(out.join("samples.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,re,im,tail"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let want = 1.0 / (2.0 * (cols[0] / 2.0).sinh());
        assert!((cols[1] - want).abs() < 1e-10 * want, "{line}");
        assert_eq!(cols[2], 0.0);
        rows += 1;
    }
    assert_eq!(rows, 17);
    let fit: Value = serde_json::from_str(&std::fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    assert!(num(&fit["fit"]["residual_norm"]) < 1e-6);
}

#[test]
fn residue_of_inverse_square_oscillator() {
    let dir = scratch("residue");
    let cfg = r#"{"task": "residue", "n": 2, "cutoff": "400",
        "symbol": {"order": -4, "components": [{"terms": [{"coef": ["4", "0"], "monomial": [0, 0, 0, 0], "radialPower": "2"}]}]},
        "fock": [{"h0Power": "-2"}]}"#;
    let (code, out) = run(&dir, cfg, &[]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out.join("residue.json")).unwrap()).unwrap();
    assert!((num(&r["value"][0]) - 2.0).abs() < 1e-10);
    assert!((num(&r["report"]["printed"][0]) - 2.0).abs() < 1e-10);
    assert!((num(&r["report"]["oracle"]["value"][0]) - 2.0).abs() < 1e-4);
    assert_eq!(r["input"]["n"], 2);
}

#[test]
fn empty_config_runs_the_full_suite() {
    let dir = scratch("verify");
    let (code, out) = run(&dir, "{}", &[]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn reports_are_byte_identical() {
    let cfg = r#"{"task": "heat-trace", "n": 2, "element": {"w": [["0.5", "0"], ["0", "0"]], "phases": ["1", "0"]}}"#;
    let (c1, o1) = run(&scratch("det1"), cfg, &["--threads", "2"]);
    let (c2, o2) = run(&scratch("det2"), cfg, &["--threads", "2"]);
    assert_eq!((c1, c2), (0, 0));
    for f in ["samples.csv", "fit.json"] {
        assert_eq!(std::fs::read(o1.join(f)).unwrap(), std::fs::read(o2.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn schema_violations_fail() {
    let dir = scratch("schema");
    assert_ne!(run(&dir, r#"{"task": "heat-trace", "unknown": 1}"#, &[]).0, 0);
    assert_ne!(run(&dir, r#"{"task": "heat-trace", "shift": "abc"}"#, &[]).0, 0);
    assert_ne!(run(&dir, r#"{"task": "residue"}"#, &[]).0, 0);
}

#[test]
fn cutoff_override_and_env_out() {
    let dir = scratch("env");
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, r#"{"task": "zeta", "n": 1, "points": [["2", "0"]]}"#).unwrap();
    let out = dir.join("from-env");
    let status = Command::new(env!("CARGO_BIN_EXE_shubin"))
        .arg("--config")
        .arg(&cfg)
        .args(["--cutoff-override", "50"])
        .env("SHUBIN_OUT", &out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("samples.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    // Σ_{k≤50} (k+1/2)^{−2} with tail ≈ 1/51
    assert!(row[4] > 1e-3);
    let full = std::f64::consts::PI.powi(2) / 2.0;
    assert!((row[2] - full).abs() <= row[4]);
}
