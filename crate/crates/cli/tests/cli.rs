use std::path::{Path, PathBuf};

use action_rate::binary::{rate_causal_binary, rate_noncausal_binary};
use action_rate::info::binary_entropy;
use action_rate_cli::{run, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn spec(name: &str) -> String {
    specs().join(name).to_string_lossy().into_owned()
}

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("action-rate").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Data rows of a CSV with `#` echo lines.
fn records(text: &str) -> Vec<csv::StringRecord> {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    assert_eq!(
        reader.headers().unwrap(),
        &csv::StringRecord::from(vec!["B", "D", "R", "mode", "exact", "argmin"])
    );
    reader.records().map(|r| r.unwrap()).collect()
}

fn num(r: &csv::StringRecord, i: usize) -> f64 {
    r[i].parse().unwrap()
}

#[test]
fn causal_curve_tracks_the_closed_form() {
    let (code, out, _) = invoke(&[
        "curve",
        "--spec",
        &spec("binary.json"),
        "--mode",
        "causal",
        "--budgets",
        "0:0.5:0.1",
    ]);
    assert_eq!(code, EXIT_OK);
    let rows = records(&out);
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let b = num(r, 0);
        assert!((num(r, 2) - rate_causal_binary(b, 0.1).unwrap()).abs() < 5e-3, "{r:?}");
        assert_eq!(&r[3], "causal");
    }
}

#[test]
fn noncausal_curve_tracks_the_closed_form() {
    let (code, out, _) = invoke(&[
        "curve",
        "--spec",
        &spec("binary.json"),
        "--mode",
        "noncausal",
        "--budgets",
        "0.1,0.3",
    ]);
    assert_eq!(code, EXIT_OK);
    for r in records(&out) {
        assert!((num(&r, 2) - rate_noncausal_binary(num(&r, 0), 0.1).unwrap()).abs() < 5e-3);
    }
}

#[test]
fn free_actions_are_flat() {
    let (code, out, _) = invoke(&[
        "curve",
        "--spec",
        &spec("free_actions.json"),
        "--mode",
        "noncausal",
        "--budgets",
        "0,0.5,1",
    ]);
    assert_eq!(code, EXIT_OK);
    let rates: Vec<f64> = records(&out).iter().map(|r| num(r, 2)).collect();
    assert_eq!(rates.len(), 3);
    assert!(rates.iter().all(|r| (r - rates[0]).abs() < 1e-9), "{rates:?}");
}

#[test]
fn unreachable_budget_prints_inf() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("costly.json");
    let text = std::fs::read_to_string(specs().join("binary.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["cost"] = serde_json::json!([[[0.3, 0.3], [0.3, 0.3]], [[1.3, 1.3], [1.3, 1.3]]]);
    std::fs::write(&path, doc.to_string()).unwrap();
    let (code, out, _) = invoke(&[
        "curve",
        "--spec",
        path.to_str().unwrap(),
        "--mode",
        "causal",
        "--budgets",
        "0.1,0.5",
    ]);
    assert_eq!(code, EXIT_OK);
    let rows = records(&out);
    assert_eq!(&rows[0][2], "inf");
    assert!(rows[0][5].starts_with("infeasible"));
    assert!(num(&rows[1], 2).is_finite());
}

#[test]
fn budgets_out_of_order_are_a_usage_error() {
    let (code, _, err) = invoke(&[
        "curve",
        "--spec",
        &spec("binary.json"),
        "--mode",
        "causal",
        "--budgets",
        "0.3,0.1",
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(!err.is_empty());
}

#[test]
fn malformed_spec_names_the_offending_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let text = std::fs::read_to_string(specs().join("binary.json")).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["channel"][0][1] = serde_json::json!([0.1, 0.8]);
    std::fs::write(&path, doc.to_string()).unwrap();
    let (code, _, err) = invoke(&[
        "curve",
        "--spec",
        path.to_str().unwrap(),
        "--mode",
        "causal",
        "--budgets",
        "0.1",
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("channel[0][1]"), "{err}");
}

#[test]
fn closed_form_reports_bstar_and_degenerates_without_side_information() {
    let (code, out, _) = invoke(&["closed-form", "--budgets", "0,0.25,0.5"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().any(|l| l.starts_with("# b*=0.2775")), "{out}");
    assert_eq!(records(&out).len(), 6);

    let (code, out, _) = invoke(&["closed-form", "--pe", "0", "--budgets", "0,0.25,0.5"]);
    assert_eq!(code, EXIT_OK);
    let hp = binary_entropy(0.1).unwrap();
    for r in records(&out) {
        assert!((num(&r, 2) - hp).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn simulation_is_reproducible() {
    let args = [
        "simulate",
        "--spec",
        &spec("binary.json"),
        "--aux",
        &spec("aux_copy_state.json"),
        "--mode",
        "thm1-binning",
        "--n",
        "10",
        "--rate",
        "0.8",
        "--epsilon",
        "0.5",
        "--trials",
        "40",
        "--seed",
        "7",
    ];
    let (code, first, _) = invoke(&args);
    assert_eq!(code, EXIT_OK);
    let (_, second, _) = invoke(&args);
    assert_eq!(first, second);
    let report: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(report["trials"], 40);
    assert_eq!(report["seed"], 7);
}

#[test]
fn rate_sweep_prints_an_array() {
    let (code, out, _) = invoke(&[
        "simulate",
        "--spec",
        &spec("binary.json"),
        "--aux",
        &spec("aux_copy_state.json"),
        "--mode",
        "thm1-binning",
        "--n",
        "8",
        "--rate",
        "0.5,0.9",
        "--epsilon",
        "0.5",
        "--trials",
        "10",
    ]);
    assert_eq!(code, EXIT_OK);
    let reports: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 2);
}

#[test]
fn missing_aux_file_is_named() {
    let (code, _, err) = invoke(&[
        "simulate",
        "--spec",
        &spec("binary.json"),
        "--aux",
        "/nonexistent/aux.json",
        "--mode",
        "thm1-binning",
        "--n",
        "8",
        "--rate",
        "0.5",
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("/nonexistent/aux.json"), "{err}");
}

#[test]
fn ceiling_is_enforced() {
    let (code, _, err) = invoke(&[
        "simulate",
        "--spec",
        &spec("binary.json"),
        "--aux",
        &spec("aux_copy_state.json"),
        "--mode",
        "thm1-binning",
        "--n",
        "24",
        "--rate",
        "0.5",
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("16777216") && err.contains("1048576"), "{err}");
}

#[test]
fn verify_levels() {
    let (code, out, _) = invoke(&["verify", "quick"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.lines().filter(|l| l.starts_with("PASS")).count() >= 6);
    assert_eq!(invoke(&["verify", "thorough"]).0, EXIT_USAGE);
}

#[test]
fn coarse_solver_fails_verification() {
    let (code, out, _) = invoke(&["verify", "full", "--grid", "2", "--refine", "0"]);
    assert_eq!(code, EXIT_FAILURE, "{out}");
    assert!(out.contains("FAIL solver-noncausal-vs-closed-form"), "{out}");
}
