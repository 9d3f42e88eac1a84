//! End-to-end tests of the `conbound` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conbound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn witness_entry(report: &Value) -> &Value {
    report["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .find(|b| b["method"] == "witness")
        .expect("witness entry")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn bound_epsilon_with_second_choi_witness() {
    let report = run_json(&[
        "bound",
        "--family",
        "epsilon",
        "--param",
        "2",
        "--witness",
        "choi2",
    ]);
    let w = witness_entry(&report);
    assert!((w["value"].as_f64().unwrap() - 1.0 / (7.0 * 3f64.sqrt())).abs() < 1e-12);
    assert_eq!(w["params"]["alpha_source"], "known");
    let caf = report["bounds"][0]["value"].as_f64().unwrap();
    assert!(caf > w["value"].as_f64().unwrap());
    assert_eq!(report["best"].as_f64().unwrap(), caf);
}

#[test]
fn bound_isotropic_three_level() {
    let report = run_json(&[
        "bound",
        "--family",
        "isotropic",
        "--dims",
        "3",
        "--param",
        "0.9",
        "--witness",
        "iso:1",
    ]);
    let v = witness_entry(&report)["value"].as_f64().unwrap();
    // sqrt(2/6) * (0.9 - 1/3) / (1/3)
    let exact = (1.0f64 / 3.0).sqrt() * (0.9 - 1.0 / 3.0) * 3.0;
    assert!((v - exact).abs() < 1e-12, "{v}");
    assert!((v - 0.9815).abs() < 1e-4);
}

#[test]
fn bound_from_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let bell = r#"{"dims":[2,2],"re":[[0.5,0,0,0.5],[0,0,0,0],[0,0,0,0],[0.5,0,0,0.5]]}"#;
    let path = write(dir.path(), "bell.json", bell);
    let report = run_json(&["bound", "--state", &path]);
    assert!((report["best"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let methods: Vec<_> = report["bounds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["method"].clone())
        .collect();
    assert_eq!(methods, ["caf", "ou", "wootters"]);
}

#[test]
fn bound_rejects_invalid_input() {
    let out = run(&["bound", "--family", "epsilon", "--param", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let dir = tempfile::tempdir().unwrap();
    let bad_json = write(dir.path(), "bad.json", "{\"re\": [[1, 0], ");
    assert_eq!(run(&["bound", "--state", &bad_json]).status.code(), Some(2));
    let not_hermitian = write(
        dir.path(),
        "nh.json",
        r#"{"dims":[2,2],"re":[[0.25,1,0,0],[0,0.25,0,0],[0,0,0.25,0],[0,0,0,0.25]]}"#,
    );
    let out = run(&["bound", "--state", &not_hermitian]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert_eq!(
        run(&[
            "bound",
            "--family",
            "gamma",
            "--param",
            "0.5",
            "--witness",
            "tang:0.5"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn lambda_anchors_and_determinism() {
    let flip = run_json(&["lambda", "--witness", "flip", "--dims", "3", "3"]);
    assert!((flip["lambda_hat"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert_eq!(
        flip["certificate_value"].as_f64().unwrap(),
        -flip["lambda_hat"].as_f64().unwrap()
    );
    let iso = run_json(&["lambda", "--witness", "iso:1", "--dims", "3", "3"]);
    assert!((iso["lambda_hat"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-3);
    let tang = run_json(&["lambda", "--witness", "tang:0.5"]);
    assert!((tang["lambda_hat"].as_f64().unwrap() - 4.25f64.sqrt()).abs() < 1e-4);

    let args = [
        "lambda",
        "--witness",
        "choi1",
        "--seed",
        "7",
        "--restarts",
        "8",
        "--iters",
        "300",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    assert_eq!(
        run(&["lambda", "--witness", "tang:0.5", "--dims", "3", "3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn lambda_reads_config_and_witness_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"restarts": 4, "iters": 200, "seed": 3}"#,
    );
    let w = write(
        dir.path(),
        "w.json",
        r#"{"dims":[2,2],"re":[[1,0,0,0],[0,0,1,0],[0,1,0,0],[0,0,0,1]],"label":"swap"}"#,
    );
    let est = run_json(&[
        "lambda",
        "--witness-file",
        &w,
        "--config",
        &cfg,
        "--iters",
        "500",
    ]);
    assert_eq!(est["witness"], "swap");
    assert_eq!(est["config"]["restarts"], 4);
    assert_eq!(est["config"]["iters"], 500);
    assert_eq!(est["config"]["seed"], 3);
    let bad_cfg = write(dir.path(), "bad.json", r#"{"restart": 4}"#);
    assert_eq!(
        run(&["lambda", "--witness", "flip", "--config", &bad_cfg])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_cdk_table() {
    let out = run(&["verify-cdk", "--d-min", "3", "--d-max", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("d,k,lambda_hat,conjectured,gap,converged")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let keys: Vec<(&str, &str)> = rows.iter().map(|r| (r[0], r[1])).collect();
    assert_eq!(
        keys,
        [
            ("3", "1"),
            ("4", "1"),
            ("4", "2"),
            ("5", "1"),
            ("5", "2"),
            ("5", "3")
        ]
    );
    let conj: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(conj, [1.0, 1.5, 1.0, 2.0, 1.25, 1.0]);
    for r in &rows {
        assert!(r[4].parse::<f64>().unwrap() <= 5e-3, "{r:?}");
    }
    assert_eq!(run(&["verify-cdk", "--d-max", "7"]).status.code(), Some(2));
    let json = run_json(&[
        "verify-cdk",
        "--d-min",
        "3",
        "--d-max",
        "3",
        "--format",
        "json",
    ]);
    assert_eq!(json[0]["conjectured"], 1.0);
}

#[test]
fn sweep_output_is_deterministic() {
    let base = [
        "sweep", "--family", "gamma", "--start", "0.1", "--stop", "0.9", "--points", "9", "--dims",
        "3,4,5",
    ];
    let par = run(&base);
    assert!(par.status.success());
    let mut seq_args = base.to_vec();
    seq_args.push("--sequential");
    let seq = run(&seq_args);
    assert_eq!(par.stdout, seq.stdout);
    assert_eq!(par.stdout, run(&base).stdout);
    let text = String::from_utf8(par.stdout).unwrap();
    assert!(text.starts_with("param,witness_d3,caf_d3,witness_d4,caf_d4,witness_d5,caf_d5\n"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn sweep_writes_file_and_clamps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("iso.csv");
    let out_s = out.to_string_lossy().into_owned();
    let args = [
        "sweep",
        "--family",
        "isotropic",
        "--dims",
        "2",
        "--start",
        "0",
        "--stop",
        "1",
        "--points",
        "5",
        "--methods",
        "witness,wootters,ou",
        "--clamp",
        "--out",
        &out_s,
    ];
    let res = run(&args);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    assert!(res.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param,witness,wootters,ou"));
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let exact = (2.0 * v[0] - 1.0).max(0.0);
        for x in &v[1..] {
            assert!((x - exact).abs() < 1e-9, "{line}");
        }
    }
    let bad = run(&[
        "sweep",
        "--family",
        "horodecki3x3",
        "--start",
        "0",
        "--stop",
        "0.9",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn selftest_reports_every_criterion() {
    let out = run(&["selftest"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text
        .lines()
        .filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]"))
        .collect();
    assert_eq!(lines.len(), 10, "{text}");
    assert!(out.status.success(), "{text}");
}
