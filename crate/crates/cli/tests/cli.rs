use std::path::Path;
use std::process::{Command, Output};

use polylearn_cli::matrix::{format_matrix, parse_matrix};
use polylearn_core::PointMatrix;
use proptest::prelude::*;
use serde_json::Value;

fn polylearn(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polylearn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn ok(out: &Path, args: &[&str]) {
    let o = polylearn(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn report(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn two_gaussian_instance_layout() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "two-gaussian", "--d", "100", "--n", "10000", "--seed", "7"];
    ok(dir.path(), &args);
    for f in ["M.mat", "P.mat", "A.mat", "manifest.json", "gen.report.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let m = report(&dir.path().join("manifest.json"));
    assert_eq!(m["d"], 100);
    assert_eq!(m["n"], 10000);
    assert_eq!(m["k"], 2);
    assert_eq!(m["seed"], 7);
    assert!((m["diameter"].as_f64().unwrap() - 20.0).abs() < 1e-9);
    let sigma0 = m["sigma0"].as_f64().unwrap();
    let scale = (100f64.sqrt() + 100f64) / 100.0;
    assert!(sigma0 > 0.9 * scale && sigma0 < 1.1 * scale, "{sigma0}");

    let again = tempfile::tempdir().unwrap();
    ok(again.path(), &args);
    for f in ["M.mat", "P.mat", "A.mat", "manifest.json"] {
        assert_eq!(std::fs::read(dir.path().join(f)).unwrap(), std::fs::read(again.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn infeasible_weight_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = polylearn(dir.path(), &["gen", "lkp", "--k", "3", "--w0", "0.5", "--d", "5", "--n", "100"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("w₀·k > 1"));
}

#[test]
fn malformed_matrix_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mat");
    std::fs::write(&bad, "dims 2 2\n1.0 2.0\n3.0 oops\n").unwrap();
    let o = polylearn(
        dir.path(),
        &["softhull", "--points", bad.to_str().unwrap(), "--epsilon", "0.001", "--delta", "0.2", "--epsilon3", "0.03"],
    );
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.mat:3:5"), "{err}");
}

#[test]
fn kolp_report_has_recovery_fields() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    ok(&inst, &["gen", "lkp", "--d", "10", "--k", "3", "--n", "800", "--seed", "3"]);
    let out = dir.path().join("run");
    ok(&out, &["kolp", "--instance", inst.to_str().unwrap(), "--m", "3000", "--seed", "1"]);
    let r = report(&out.join("kolp.report.json"));
    assert_eq!(r["results"]["per_vertex_error"].as_array().unwrap().len(), 3);
    assert_eq!(r["results"]["recovered"], true);
    assert!(r["bounds"]["recovery_radius"].as_f64().unwrap() > 0.0);
    assert!(out.join("vertices.mat").exists());
    let stages: Vec<&str> = r["stages"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert!(!stages.is_empty());
}

#[test]
fn rsh_estimate_reports_bound() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["rsh-estimate", "--fixture", "example1-segment", "--trials", "20000", "--delta", "1"]);
    let r = report(&dir.path().join("rsh-estimate.report.json"));
    assert_eq!(r["bounds"]["theoretical_lower_bound"].as_f64().unwrap(), 2.44140625e-5);
    assert_eq!(r["results"]["meets_bound"], true);
    for key in [
        "tool", "version", "command", "seed", "constants", "config", "started_at_unix", "stages", "checks", "bounds",
        "results", "outputs",
    ] {
        assert!(r.get(key).is_some(), "{key}");
    }
}

#[test]
fn softhull_on_square_plus_midpoint() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["softhull", "--fixture", "square-plus-midpoint", "--epsilon", "0.0008", "--delta", "0.12", "--epsilon3", "0.025"],
    );
    let r = report(&dir.path().join("softhull.report.json"));
    assert_eq!(r["results"]["selected"], serde_json::json!([0, 1, 2, 3]));
    assert_eq!(r["results"]["pruned"], serde_json::json!([4]));
    assert!(dir.path().join("Q.mat").exists());
}

#[test]
fn constants_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["fixtures", "--constants", "c=30,c0=5"]);
    let r = report(&dir.path().join("fixtures.report.json"));
    assert_eq!(r["constants"]["c"], 30.0);
    assert_eq!(r["constants"]["c0"], 5.0);
    assert_eq!(r["constants"]["c_prime"], 100.0);
}

#[test]
fn bad_constants_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = polylearn(dir.path(), &["fixtures", "--constants", "c=-1"]);
    assert!(!o.status.success());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_text_round_trip(
        d in 1usize..6,
        cols in prop::collection::vec(prop::collection::vec(-1e12f64..1e12, 6), 1..20),
    ) {
        let cols: Vec<Vec<f64>> = cols.into_iter().map(|c| c[..d].to_vec()).collect();
        let m = PointMatrix::from_columns(d, &cols).unwrap();
        let text = format_matrix(&m);
        let back = parse_matrix(&text, "prop").unwrap();
        prop_assert_eq!(back, m);
    }
}
