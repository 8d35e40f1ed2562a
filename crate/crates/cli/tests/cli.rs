use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nash_core::holder::{Field, FIELD_HEADER_BYTES};
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nash-horizon"))
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).expect("summary written"))
        .expect("summary is JSON")
}

#[test]
fn polynomial_weights_certify() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("certify-weights", &configs().join("certify_polynomial.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(tmp.path());
    assert_eq!(s["status"], "passed");
    assert_eq!(s["results"]["edge_contaminated"], false);
    assert_eq!(s["config_sha256"].as_str().map(str::len), Some(64));
    let ratios = std::fs::read_to_string(tmp.path().join("ratios.csv")).unwrap();
    assert!(ratios.starts_with("i,beta,self_convolution,ratio\n"));
    assert_eq!(ratios.lines().count(), 1 + 65);
}

#[test]
fn geometric_weights_fail_when_certification_is_expected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"weights": {"kind": "geometric", "params": {"ratio": 0.5}, "W": 64},
            "tolerances": {"expect_certified": true}}"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = run("certify-weights", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(summary(&out)["status"], "failed");
}

#[test]
fn trivial_game_solves_in_one_iteration() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("solve", &configs().join("solve_trivial.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let iterations = std::fs::read_to_string(tmp.path().join("iterations.csv")).unwrap();
    assert_eq!(iterations.lines().count(), 2);

    // field files follow the flat layout and carry their sidecar
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("u_0.json")).unwrap()).unwrap();
    let times: Vec<f64> = serde_json::from_value(side["times"].clone()).unwrap();
    let bytes = std::fs::read(tmp.path().join("u_0.bin")).unwrap();
    assert_eq!(bytes.len(), FIELD_HEADER_BYTES + 8 * times.len() * 21 * 21);
    let f = Field::from_bytes(&bytes, times, Some(0)).unwrap();
    assert_eq!(f.sup_norm(), 0.0);
}

#[test]
fn unknown_fields_are_schema_violations() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"weights": {"kind": "polynomial", "W": 64}, "speed": 3}"#).unwrap();
    let o = run("certify-weights", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mismatched_subcommand_is_a_schema_violation() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("solve", &configs().join("certify_polynomial.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_weights_are_schema_violations() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"weights": {"kind": "polynomial", "params": {"exponent": 1.5}, "W": 64}}"#).unwrap();
    let o = run("certify-weights", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_override_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("certify-weights", &configs().join("certify_polynomial.json"), tmp.path(), &["--seed-override", "11"]);
    assert_eq!(o.status.code(), Some(0));
    let s = summary(tmp.path());
    assert_eq!(s["seed"], 11);
    assert_eq!(s["config"]["seed"], 11);
}

#[test]
fn fpk_diagnostic_writes_mass_table() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run("fpk-diagnostic", &configs().join("fpk_gaussian.json"), tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let table = std::fs::read_to_string(tmp.path().join("gradient_mass.csv")).unwrap();
    assert!(table.starts_with("elapsed,integrand,cumulative,mass\n"));
    assert!(tmp.path().join("density.bin").exists());
}

#[test]
fn oracle_compare_matches_riccati() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"grid": {"points": 41, "half_width": 4.0},
            "solver": {"transport": "central", "boundary": "quadratic_extrapolation"},
            "game": {"kind": "lq", "players": 2, "horizon": 0.2},
            "picard": {"tol": 1e-6, "max_iter": 30},
            "tolerances": {"oracle_error": 1e-2}}"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = run("oracle-compare", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    for f in ["riccati.csv", "iterations.csv", "oracle.csv", "summary.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn monte_carlo_tables_do_not_depend_on_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("heat_mc.json");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run("verify-decay", &cfg, &a, &["--threads", "1"]).status.code(), Some(0));
    assert_eq!(run("verify-decay", &cfg, &b, &["--threads", "3"]).status.code(), Some(0));
    for f in ["mc.csv", "decay.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}
