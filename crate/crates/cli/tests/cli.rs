use std::path::Path;
use std::process::{Command, Output};

use aszeta::audit::AuditFixture;
use aszeta::statistics::{read_samples_csv, SAMPLE_COLUMNS};
use serde_json::Value;

fn aszeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aszeta"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn zeta_of_x_squared() {
    let v = json(&aszeta(&["zeta", "--q", "3", "--f", "0,0,1"]));
    assert_eq!(v["P"], serde_json::json!([1, 0, 3]));
    assert_eq!(v["genus"], 1);
    assert_eq!(v["functional_equation"], true);
    assert_eq!(v["config"]["subcommand"], "zeta");
    assert_eq!(v["config"]["f"], "0,0,1");
    assert!(v["config"].get("workers").is_none());
}

#[test]
fn golden_reports() {
    let out = aszeta(&["zeta", "--f", "1,2,0,1,1"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden("zeta_d4.json"));
    let out = aszeta(&["points", "--f", "1,2,0,1,1", "--n", "3"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden("points_d4.json"));
}

#[test]
fn golden_exhaustive_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let out = aszeta(&["moments", "--d", "4", "--k", "3", "--n", "1", "--format", "csv", "--output", path.to_str().unwrap()]);
    let v = json(&out);
    assert_eq!(v["samples_csv"], path.to_str().unwrap());
    assert_eq!(v["report"]["members"], 54);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, golden("moments_d4.csv"));
    let rows = read_samples_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 54);
    assert!(rows.iter().all(|r| r.seed.is_none() && r.n_interval.is_none()));
}

#[test]
fn guards_exit_with_one() {
    let out = aszeta(&["zeros", "--q", "3", "--d", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p divides d"));

    for args in [
        &["frobnicate"][..],
        &["zeta", "--q", "6", "--f", "0,1"],
        &["zeta", "--q", "3", "--f", "0,0,3"],
        &["lpoly", "--f", "0,0,1", "--h", "3"],
        &["bs"],
        &["bs", "--k", "5", "--beta", "1.5"],
        &["covariance", "--d", "41", "--format", "csv"],
        &["zeta", "--f", "0,1", "--d", "4"],
        &["moments", "--d", "8", "--k", "5", "--n", "2"],
        &["gaussian", "--d", "41", "--samples", "0"],
    ] {
        let out = aszeta(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn tolerance_breach_exits_with_two() {
    let out = aszeta(&["zeta", "--f", "1,2,0,1,1", "--zeta-tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(2));
    let out = aszeta(&["zeros", "--f", "1,2,0,1,1", "--rh-tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(2));
    // the report is still written
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["characters"].as_array().unwrap().len(), 2);
}

#[test]
fn single_curve_commands() {
    let v = json(&aszeta(&["lpoly", "--f", "0,0,1", "--h", "1"]));
    assert_eq!(v["l_polynomials"][0]["degree"], 1);

    let v = json(&aszeta(&["zeros", "--d", "7", "--seed", "3", "--h", "2"]));
    assert_eq!(v["characters"][0]["angles"].as_array().unwrap().len(), 6);

    let v = json(&aszeta(&["explicit-check", "--d", "8", "--seed", "2"]));
    for c in v["characters"].as_array().unwrap() {
        assert!(c["explicit_relative"].as_f64().unwrap() < 1e-8);
    }

    let v = json(&aszeta(&["discrepancy", "--d", "10", "--seed", "1", "--beta", "0.3"]));
    assert_eq!(v["k"], 2);

    let v = json(&aszeta(&["bs", "--k", "10"]));
    assert_eq!(v["properties"]["holds"], true);
    assert_eq!(v["coefficients"].as_array().unwrap().len(), 11);
}

#[test]
fn family_average_over_f3() {
    let v = json(&aszeta(&["family-avg", "--d", "5"]));
    assert_eq!(v["family_size"], 162);
    let counts = v["point_counts"].as_array().unwrap();
    let expected = [4.0, 10.0, 34.0, 82.0];
    for (row, e) in counts.iter().zip(expected) {
        assert!((row["mean"].as_f64().unwrap() - e).abs() < 1e-9);
        assert_eq!(row["expected"].as_f64().unwrap(), e);
    }
    let v = json(&aszeta(&["family-avg", "--d", "5", "--variant", "twisted", "--n", "2"]));
    assert!(v["point_counts"][0]["expected"].is_null());
}

#[test]
fn gaussian_is_deterministic() {
    let run = |workers: &str| aszeta(&["gaussian", "--q", "3", "--d", "41", "--beta", "0.5", "--samples", "2000", "--seed", "7", "--workers", workers]);
    let a = run("1");
    let b = run("4");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["report"]["k"], 10);
    assert_eq!(v["report"]["clamped"], true);
}

#[test]
fn csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let out = aszeta(&["gaussian", "--d", "41", "--samples", "50", "--seed", "3", "--format", "csv", "--output", path.to_str().unwrap()]);
    json(&out);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), SAMPLE_COLUMNS.join(","));
    let rows = read_samples_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().enumerate().all(|(i, r)| r.sample_index == i as u64 && r.seed.is_some()));
    // fifteen significant digits
    let first = text.lines().nth(1).unwrap().split(',').nth(2).unwrap();
    assert_eq!(first.split('e').next().unwrap().trim_start_matches('-').len(), 16);
}

#[test]
fn calibrate_writes_a_loadable_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("audit.json");
    let out = aszeta(&["calibrate", "--samples", "300", "--seed", "7", "--output", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fixture = AuditFixture::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(fixture.covariance_samples, 300);
    assert!(fixture.within_bands());
}
