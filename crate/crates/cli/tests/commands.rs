use std::process::{Command, Output};

use serde_json::Value;

fn qnlb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnlb")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn value_record() {
    let out = qnlb(&["value", "--model", "qnlb", "--protocol", "protocolP", "--p", "1", "--n", "2"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["value"], 4.0);
    assert_eq!(v["branch"], "2/3<=p<=1");
    assert_eq!(v["model"], "qnlb");
    assert_eq!(v["protocol"], "protocolP");

    let out = qnlb(&["value", "--model", "nlb", "--protocol", "parity", "--p", "0.7", "--n", "5"]);
    assert_eq!(stdout_json(&out)["value"], 3.4);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["value", "--model", "nlb", "--protocol", "protocolP", "--p", "0.3"][..],
        &["value", "--model", "qnlb", "--protocol", "protocolP", "--p", "0"],
        &["value", "--model", "qnlb", "--protocol", "parity", "--p", "1.2"],
        &["certify", "--n", "4", "--p", "0.5"],
        &["certify", "--n", "2", "--grid", "0.5:0.1:0.1"],
        &["curve", "--n", "2", "--grid", "1", "--out", "/dev/null"],
    ] {
        let out = qnlb(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = qnlb(&["certify", "--n", "4", "--p", "0.5"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("n = 1, 2, 3"));
    let out = qnlb(&["value", "--model", "qnlb", "--protocol", "protocolP", "--p", "0"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("2.8284271247"));
}

#[test]
fn certify_grid_all_pass() {
    for n in ["1", "2", "3"] {
        let out = qnlb(&["certify", "--n", n, "--grid", "default"]);
        assert!(out.status.success(), "n={n}");
        let lines: Vec<Value> = String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 20);
        let ps: Vec<f64> = lines.iter().map(|r| r["p"].as_f64().unwrap()).collect();
        assert!(ps.windows(2).all(|w| w[0] < w[1]));
        for r in &lines {
            assert_eq!(r["pass"], true);
            assert!(r["gap"].as_f64().unwrap().abs() <= 1e-9);
        }
    }
}

#[test]
fn certify_boundary_flag() {
    let out = qnlb(&["certify", "--n", "3", "--p", "1"]);
    assert!(out.status.success());
    let r = stdout_json(&out);
    assert_eq!(r["boundary"], true);
    assert!(r.get("min_eig_full_K").is_some());
}

#[test]
fn curve_csv_is_stable_and_dominant() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = qnlb(&["curve", "--n", "3", "--grid", "20", "--out", path.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert!(!bytes.contains(&b'\r'));

    let mut rdr = csv::Reader::from_path(&a).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["p", "n", "qnlb_value", "nlb_value"]);
    let rows: Vec<(f64, usize, f64, f64)> = rdr.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 20);
    assert_eq!(rows[0].0, 0.05);
    assert_eq!(rows[19].0, 1.0);
    for &(p, n, q, c) in &rows {
        assert_eq!(n, 3);
        assert!(q >= c - 1e-12);
        if p >= 2.0 / 3.0 {
            assert!((q - 2.0 * (1.0 + p)).abs() < 1e-9 && (c - q).abs() < 1e-12);
        }
    }
    // p = 1/4: 73/24 and 3 − ⅛, both to ten significant digits.
    assert_eq!(rows[4], (0.25, 3, 3.041_666_667, 2.875));
}

#[test]
fn curve_unwritable_path_fails() {
    let out = qnlb(&["curve", "--n", "1", "--grid", "4", "--out", "/nonexistent/dir/c.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tables_text_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let out = qnlb(&["tables", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("3-(q-p)^n"));
    assert!(text.contains("3.098076211"));
    assert!(text.contains("no for n<=3"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["qnlb"]["rows"][1]["limit"], 3.098_076_211);
    assert!(v["qnlb"]["rows"][0]["caveat"].as_str().unwrap().contains("p = 0"));
}

#[test]
fn solve_examples() {
    for (n, p, expected, tol) in [("1", "0.5", 3.098_076, 1e-4), ("1", "0.9", 3.8, 1e-4), ("2", "0.25", 2.995_234, 5e-4)] {
        let out = qnlb(&["solve", "--n", n, "--p", p]);
        assert!(out.status.success(), "n={n} p={p}");
        let v = stdout_json(&out);
        assert!((v["value"].as_f64().unwrap() - expected).abs() <= tol, "n={n} p={p}: {}", v["value"]);
        assert_eq!(v["converged"], true);
        assert!(v["G_star"].is_array());
    }
}

#[test]
fn export_then_solve_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("program.json");
    let out = qnlb(&["export", "--n", "2", "--p", "0.25", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let export: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(export["dimension"], 7);
    assert_eq!(export["labels"][3], "z00");

    let from_file = stdout_json(&qnlb(&["solve", "--program", path.to_str().unwrap()]));
    let direct = stdout_json(&qnlb(&["solve", "--n", "2", "--p", "0.25"]));
    let (a, b) = (from_file["value"].as_f64().unwrap(), direct["value"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-6);
}
