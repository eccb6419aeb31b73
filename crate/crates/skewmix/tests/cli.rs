//! End-to-end tests of the `skewmix` binary: JSON in, JSON/CSV out, exit
//! codes, and pipe composition.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const SPEC: &str = r#"{
    "xi": [0.3, -0.7],
    "Omega": [[2.0, 0.6], [0.6, 1.0]],
    "alpha": [3.0, -1.5],
    "mixing": {"type": "skew_t", "nu": 5.0}
}"#;

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_skewmix"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "expected success, got {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn describe_output_feeds_back_as_input() {
    let first = run(&["describe"], SPEC);
    let report = stdout_json(&first);
    assert_eq!(report["d"], 2);
    assert!(report["mean"].is_array());
    // The report is a superset of the specification.
    let second = run(&["describe"], &report.to_string());
    let again = stdout_json(&second);
    assert_eq!(again["alpha_star"], report["alpha_star"]);
    assert_eq!(again["covariance"], report["covariance"]);
}

#[test]
fn canonicalize_composes_to_identity() {
    let first = run(&["canonicalize", "--method", "omega-sigma", "--verify"], SPEC);
    let report = stdout_json(&first);
    assert_eq!(report["method"], "ics_omega_sigma");
    assert!(
        report["verification"]["max_normalization_deviation"]
            .as_f64()
            .unwrap()
            < 1e-10
    );
    // Canonicalizing the canonical form again is the identity transform.
    let transformed = report["transformed"].to_string();
    let second = run(&["canonicalize", "--method", "cp"], &transformed);
    let report2 = stdout_json(&second);
    let h = report2["h"].as_array().unwrap();
    for (r, row) in h.iter().enumerate() {
        for (c, v) in row.as_array().unwrap().iter().enumerate() {
            let expected = if r == c { 1.0 } else { 0.0 };
            assert!(
                (v.as_f64().unwrap() - expected).abs() < 1e-9,
                "h[{r}][{c}] = {v}"
            );
        }
    }
    assert!(
        (report2["alpha_star"].as_f64().unwrap() - report["alpha_star"].as_f64().unwrap()).abs()
            < 1e-9
    );
}

#[test]
fn indices_reports_blocked_moments_as_null() {
    let out = run(&["indices"], SPEC);
    let report = stdout_json(&out);
    // nu = 5: skewness index exists, kurtosis index exists (nu > 4).
    assert!(report["gamma1"].is_f64());
    assert!(report["gamma2"].is_f64());
    let heavy = SPEC.replace("5.0}", "3.5}");
    let out = run(&["indices"], &heavy);
    let report = stdout_json(&out);
    assert!(report["gamma1"].is_f64());
    assert!(report["gamma2"].is_null());
    assert!(report["gamma2_blocked_by"].as_str().unwrap().contains('4'));
}

#[test]
fn indices_with_monte_carlo_block() {
    let out = run(
        &["indices", "--mc", "3000", "--seed", "11", "--bootstrap", "20"],
        SPEC,
    );
    let report = stdout_json(&out);
    let mc = &report["monte_carlo"];
    assert_eq!(mc["n"], 3000);
    assert!(mc["b1"].as_f64().unwrap() > 0.0);
    assert!(mc["b1_se"].as_f64().unwrap() > 0.0);
    // Deterministic: the same invocation reproduces byte-identical output.
    let again = run(
        &["indices", "--mc", "3000", "--seed", "11", "--bootstrap", "20"],
        SPEC,
    );
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn mode_report_is_stationary() {
    let out = run(&["mode"], SPEC);
    let report = stdout_json(&out);
    assert!(report["residual_gradient_norm"].as_f64().unwrap() < 1e-8);
    assert_eq!(report["uniqueness"], "not_proven");
    let mode = report["mode"].as_array().unwrap();
    assert_eq!(mode.len(), 2);
}

#[test]
fn sample_writes_reproducible_csv() {
    let out = run(&["sample", "--n", "5", "--seed", "42"], SPEC);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.trim().lines().collect();
    assert_eq!(rows.len(), 5);
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 2);
        for f in fields {
            f.parse::<f64>().expect("CSV field parses as a float");
        }
    }
    let again = run(&["sample", "--n", "5", "--seed", "42"], SPEC);
    assert_eq!(text, String::from_utf8(again.stdout).unwrap());
}

#[test]
fn validate_passes_and_respects_tolerance_overrides() {
    // nu = 5: the index z-tests have no central-limit backing (sixth and
    // eighth mixing moments are missing), so they are skipped rather than
    // spuriously failed; everything else runs and passes.
    let out = run(&["validate", "--n", "20000", "--seed", "5"], SPEC);
    let report = stdout_json(&out);
    assert_eq!(report["passed"], true);
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "mode_grid"));
    assert!(checks.iter().all(|c| c["status"] != "fail"));
    let skew_check = checks
        .iter()
        .find(|c| c["name"] == "skewness_index_mc")
        .unwrap();
    assert_eq!(skew_check["status"], "skipped");
    assert!(skew_check["detail"].as_str().unwrap().contains("central-limit"));

    // With no mixing every moment exists, the z-tests run, and an absurdly
    // small z-limit forces a failure and exit code 4.
    let plain = SPEC.replace(r#"{"type": "skew_t", "nu": 5.0}"#, r#"{"type": "degenerate"}"#);
    let out = run(&["validate", "--n", "20000", "--seed", "5"], &plain);
    let report = stdout_json(&out);
    assert_eq!(report["passed"], true);
    let checks = report["checks"].as_array().unwrap();
    let kurt_check = checks
        .iter()
        .find(|c| c["name"] == "kurtosis_index_mc")
        .unwrap();
    assert_eq!(kurt_check["status"], "pass");
    let out = run(
        &["validate", "--n", "20000", "--seed", "5", "--tol", "mc_z=1e-6"],
        &plain,
    );
    assert_eq!(out.status.code(), Some(4));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn exit_codes_follow_the_error_taxonomy() {
    // Malformed input: 2.
    let out = run(&["describe"], "{ not json");
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    // Invalid parameters (non-SPD scale): 2.
    let bad = r#"{"xi": [0, 0], "Omega": [[1.0, 2.0], [2.0, 1.0]], "alpha": [1, 0]}"#;
    assert_eq!(run(&["describe"], bad).status.code(), Some(2));
    // Domain restriction (fourth mixing moment missing): 3.
    let heavy = SPEC.replace("5.0}", "3.5}");
    let out = run(&["canonicalize", "--method", "sigma-kappa"], &heavy);
    assert_eq!(out.status.code(), Some(3));
    // Unknown tolerance key: 2.
    let out = run(&["validate", "--tol", "bogus=1"], SPEC);
    assert_eq!(out.status.code(), Some(2));
    // Unparseable tolerance: clap rejects with its usage error (2).
    let out = run(&["validate", "--tol", "mc_z"], SPEC);
    assert_eq!(out.status.code(), Some(2));
    // Missing input file: 2.
    let out = run(&["describe", "--input", "/nonexistent/spec.json"], "");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("skewmix-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = run(
        &["describe", "--output", path.to_str().unwrap()],
        SPEC,
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let report: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["d"], 2);
    std::fs::remove_dir_all(&dir).unwrap();
}
