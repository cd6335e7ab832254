use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn polyharm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyharm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn p3_single_minimal_root() {
    let out = polyharm(&["p3", "--m", "2", "--k", "1", "--r", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&out);
    assert_eq!(rep["schema_version"], 1);
    let roots = rep["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 1);
    assert!((roots[0]["root"].as_f64().unwrap() - 2.0).abs() < 1e-10);
    assert_eq!(roots[0]["minimal"], true);
}

#[test]
fn p3_rejects_bad_k() {
    let out = polyharm(&["p3", "--m", "2", "--k", "2", "--r", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lorentz3_case_lists() {
    let cases = |r: &str| -> Vec<String> {
        let out = polyharm(&["lorentz3", "--r", r]);
        assert_eq!(out.status.code(), Some(0));
        json(&out)["cases"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_str().unwrap().to_string())
            .collect()
    };
    assert_eq!(cases("3"), ["1", "2", "5", "6a", "6b"]);
    assert_eq!(cases("4"), ["1", "2", "5", "6a"]);
    assert_eq!(cases("5"), ["1", "2", "3", "4", "5", "6a"]);
}

#[test]
fn verify_catalog_passes_and_detects_wrong_expectations() {
    let out = polyharm(&["verify-catalog", "--r", "2,3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["ok"], true);

    let dir = tempfile::tempdir().unwrap();
    // The small sphere of curvature 2 is not 3-harmonic.
    let wrong = write(
        dir.path(),
        "wrong.json",
        r#"{"schema_version": 1, "entries": [{"id": "perturbed", "ref": "injected failure",
            "family": {"family": "small_sphere", "m": 2, "t": 1, "c": "r - 1"},
            "r": [3], "expect": "proper_r_harmonic"}]}"#,
    );
    let out = polyharm(&["verify-catalog", "--r", "3", "--expectations", &wrong]);
    assert_eq!(out.status.code(), Some(1));
    let rep = json(&out);
    assert_eq!(rep["expectations"][0]["passed"], false);

    let unknown = write(
        dir.path(),
        "unknown.json",
        r#"{"schema_version": 1, "entries": [], "notes": "x"}"#,
    );
    let out = polyharm(&["verify-catalog", "--expectations", &unknown]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_catalog_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub/catalog.csv");
    let out = polyharm(&[
        "verify-catalog",
        "--r",
        "3",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(path).unwrap();
    assert!(text.starts_with("id,r,expected,closed_form,numeric,residual_main,passed\n"));
    assert!(text.contains("complex-circle-triharmonic,3,proper_r_harmonic"));
}

#[test]
fn check_catalog_and_custom_documents() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(
        dir.path(),
        "s21_3.json",
        r#"{"catalog": {"family": "small_sphere", "m": 2, "t": 1, "c": 3}}"#,
    );
    let out = polyharm(&["check", &good, "--r", "3", "--grid", "6x6"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rep = json(&out);
    assert_eq!(rep["harmonicity"]["verdict"], "proper_r_harmonic");
    assert!(rep["field_residuals"]["max_scalar"].as_f64().unwrap() < 1e-4);

    let bad = write(
        dir.path(),
        "s21_2.json",
        r#"{"catalog": {"family": "small_sphere", "m": 2, "t": 1, "c": 2}}"#,
    );
    let out = polyharm(&["check", &bad, "--r", "3", "--grid", "4"]);
    assert_eq!(out.status.code(), Some(1));

    // S^2_1(3) in S^3_1 written out by hand.
    let custom = write(
        dir.path(),
        "custom.json",
        r#"{"custom": {"ambient": {"dim": 3, "index": 1, "curvature": 1},
            "vars": ["s", "t"],
            "coords": ["sqrt(1/3)*sinh(s)", "sqrt(1/3)*cosh(s)*cos(t)", "sqrt(1/3)*cosh(s)*sin(t)", "sqrt(2/3)"],
            "domain": [[0.2, 1.2], [0.2, 1.2]]}}"#,
    );
    let out = polyharm(&["check", &custom, "--r", "3", "--grid", "5x5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let strict = write(
        dir.path(),
        "strict.json",
        r#"{"catalog": {"family": "small_sphere", "m": 2, "t": 1, "c": 3, "extra": true}}"#,
    );
    assert_eq!(polyharm(&["check", &strict, "--r", "3"]).status.code(), Some(2));
    let grid = polyharm(&["check", &good, "--r", "3", "--grid", "3x3x3"]);
    assert_eq!(grid.status.code(), Some(2));
}

#[test]
fn bscroll_exports_are_fixed_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = polyharm(&[
            "bscroll",
            "--lambda",
            "2",
            "--r",
            "5",
            "--s-max",
            "1",
            "--step",
            "0.01",
            "--u",
            "-0.5,0,0.5",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        (out.stdout, out_dir)
    };
    let (a, da) = run("a");
    let (b, db) = run("b");
    assert_eq!(a, b);
    for f in ["report.json", "trajectory.csv", "surface.csv"] {
        assert_eq!(fs::read(da.join(f)).unwrap(), fs::read(db.join(f)).unwrap(), "{f}");
    }
    let traj = fs::read_to_string(da.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with(
        "s,A1,A2,A3,A4,B1,B2,B3,B4,C1,C2,C3,C4,gamma1,gamma2,gamma3,gamma4,pairing_drift\n"
    ));
    assert_eq!(traj.lines().count(), 102);
    let surf = fs::read_to_string(da.join("surface.csv")).unwrap();
    assert!(surf.starts_with("s,u,x1,x2,x3,x4,membership_residual\n"));
    assert_eq!(surf.lines().count(), 1 + 101 * 3);

    let rep: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(rep["report"]["harmonicity"]["verdict"], "proper_r_harmonic");
    assert_eq!(rep["report"]["isoparametric"], true);
    assert!((rep["report"]["closed"]["gauss_curvature"].as_f64().unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn bscroll_with_vanishing_k_is_not_isoparametric() {
    let out = polyharm(&[
        "bscroll", "--lambda", "2", "--k-spec", "poly:0,1", "--r", "5", "--s-max", "1", "--step", "0.01",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&out);
    assert_eq!(rep["report"]["isoparametric"], false);
    assert_eq!(rep["report"]["k_zeros"][0], 0.0);
    assert_eq!(rep["report"]["harmonicity"]["verdict"], "proper_r_harmonic");
}

#[test]
fn bscroll_configuration_errors() {
    for args in [
        vec!["bscroll", "--lambda", "1", "--k-spec", "cos:1", "--r", "2"],
        vec!["bscroll", "--lambda", "1", "--r", "2", "--step", "0"],
        vec!["bscroll", "--lambda", "1", "--r", "2", "--s-max", "-1"],
        vec!["bscroll", "--r", "2"],
    ] {
        assert_eq!(polyharm(&args).status.code(), Some(2), "{args:?}");
    }
}
