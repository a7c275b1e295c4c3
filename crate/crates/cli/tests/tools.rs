mod common;

use std::fs;

use common::{cbdc, ok, p};

#[test]
fn bottleneck_between_diagram_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    fs::write(&a, r#"{"dim0": [[0.0, "inf"], [0.1, 0.5]], "dim1": []}"#).unwrap();
    fs::write(&b, r#"{"dim0": [[0.0, "inf"]], "dim1": [[0.2, 0.3]]}"#).unwrap();
    let out = ok(&["bottleneck", p(&a), p(&b)]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["dim0"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    assert!((v["dim1"].as_f64().unwrap() - 0.05).abs() < 1e-12);

    let out = ok(&["bottleneck", p(&a), p(&a), "--dim", "0", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "dim,distance\n0,0\n");

    assert_eq!(cbdc(&["bottleneck", p(&a), p(&b), "--dim", "2"]).status.code(), Some(2));
}

#[test]
fn bottleneck_between_images_is_bounded_by_sup_distance() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.pgm"), dir.path().join("b.pgm"));
    fs::write(&a, "P2\n3 3\n100\n0 50 0\n50 90 50\n0 50 0\n").unwrap();
    fs::write(&b, "P2\n3 3\n100\n0 40 0\n50 90 60\n0 50 10\n").unwrap();
    let out_file = dir.path().join("d.json");
    ok(&["bottleneck", p(&a), p(&b), "--out", p(&out_file)]);
    let v = common::json(&out_file);
    for d in ["dim0", "dim1"] {
        assert!(v[d].as_f64().unwrap() <= 0.1 + 1e-12, "{d}");
    }
}

#[test]
fn simulate_coverage_matches_closed_form() {
    let out = ok(&["simulate-coverage", "--trials", "400", "--n-cal", "99", "--alpha", "0.1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let (mean, se) = (v["mean"].as_f64().unwrap(), v["std_error"].as_f64().unwrap());
    assert_eq!(v["expected"].as_f64().unwrap(), 0.9);
    assert!((mean - 0.9).abs() <= 4.0 * se, "mean {mean} se {se}");
    assert_eq!(v["per_trial"].as_array().unwrap().len(), 400);

    let csv = ok(&["simulate-coverage", "--trials", "5", "--generator", "logit", "--classes", "3", "--format", "csv"]);
    assert_eq!(String::from_utf8(csv.stdout).unwrap().lines().count(), 6);
}

#[test]
fn simulate_coverage_ignores_thread_count() {
    let args = ["simulate-coverage", "--trials", "50", "--generator", "oracle", "--classes", "4"];
    let one = ok(&[&["--threads", "1"], &args[..]].concat());
    let four = ok(&[&["--threads", "4"], &args[..]].concat());
    assert_eq!(one.stdout, four.stdout);
}
