//! End-to-end runs of the `geotail` binary.

use std::fs;
use std::process::Command;

fn geotail(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_geotail"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn bound_zero_delta_is_degenerate() {
    let (code, out, _) = geotail(&["bound", "--probs", "0.5,0.5", "--delta", "0"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert_eq!(rows[0][4], "lower_bound");
    assert_eq!(rows[1][4].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[1][5], "degenerate");
    assert_eq!(rows[1][7], "degenerate");
    assert!(out.ends_with('\n'));
}

#[test]
fn bound_linear_regime() {
    let (code, out, _) = geotail(&["bound", "--probs", "0.5,0.5", "--delta", "8"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    let upper: f64 = rows[1][6].parse().unwrap();
    assert!((upper - (-1.0f64).exp()).abs() < 1e-15);
    assert_eq!(rows[1][7], "linear");
}

#[test]
fn bound_onemax_generator() {
    let (code, out, _) = geotail(&["bound", "--spec", "onemax:100:50", "--delta", "100,200"]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 3);
    let mean: f64 = rows[1][1].parse().unwrap();
    assert!((mean - 449.920_533_832_942_5).abs() < 1e-9);
    let upper: f64 = rows[1][6].parse().unwrap();
    assert!((upper - (1.0 - 0.142_585_307_088_357)).abs() < 1e-12);

    let (code, out, _) = geotail(&[
        "bound",
        "--spec",
        "onemax:100:0",
        "--delta",
        "100",
        "--onemax-constants",
    ]);
    assert_eq!(code, 0);
    let lower: f64 = csv_rows(&out)[1][4].parse().unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((lower - (-3.0 / pi2).exp()).abs() < 1e-15);
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["bound", "--probs", "0.5,1.5", "--delta", "1"],
        vec!["bound", "--probs", "0.5", "--delta", "2,1"],
        vec!["bound", "--probs", "0.5", "--delta", "-1"],
        vec!["bound", "--spec", "onemax:3", "--delta", "1"],
        vec!["simulate", "--process", "rls-onemax", "--n", "5"],
        vec![
            "simulate",
            "--process",
            "rls-onemax",
            "--n",
            "5",
            "--seed",
            "1",
            "--replications",
            "0",
        ],
        vec![
            "verify",
            "--process",
            "rls-onemax",
            "--n",
            "5",
            "--seed",
            "1",
            "--delta",
            "1",
        ],
        vec!["nonsense"],
    ] {
        let (code, _, err) = geotail(&args);
        assert_eq!(code, 2, "{args:?}: {err}");
    }
}

#[test]
fn malformed_spec_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    fs::write(&path, "{\n  \"schema\": 1,\n  \"probs\": [0.5, oops]\n}\n").unwrap();
    let (code, _, err) = geotail(&["bound", "--spec", path.to_str().unwrap(), "--delta", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("spec.json:3:"), "{err}");
}

#[test]
fn json_spec_and_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, "{\"schema\": 1, \"probs\": [1.0, 1.0]}\n").unwrap();
    let config = dir.path().join("exp.json");
    fs::write(
        &config,
        "{\"schema\": 1, \"process\": \"level-chain\", \"partition\": {\"probs\": [1.0, 1.0]}, \
         \"replications\": 100, \"master_seed\": 5, \"format\": \"json\"}\n",
    )
    .unwrap();
    let (code, out, err) = geotail(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["total"], 100);
    assert_eq!(v["histogram"][0]["hitting_time"], 3);
    assert_eq!(v["histogram"][0]["count"], 100);

    let (code, out, _) = geotail(&["exact", "--spec", spec.to_str().unwrap(), "--t-max", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("mass,2.0000000000000000e0,1.0000000000000000e0"));
}

#[test]
fn simulate_trivial_processes() {
    let (code, out, _) = geotail(&[
        "simulate",
        "--process",
        "coupon-collector",
        "--n",
        "7",
        "--k",
        "7",
        "--replications",
        "50",
        "--seed",
        "9",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("histogram,1,50\n"));

    let (code, out, _) = geotail(&[
        "simulate",
        "--process",
        "level-chain",
        "--probs",
        "1,1",
        "--replications",
        "100",
        "--seed",
        "9",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("histogram,3,100\n"));
}

#[test]
fn cap_exceeded_exits_3() {
    let (code, _, err) = geotail(&[
        "simulate",
        "--process",
        "rls-onemax",
        "--n",
        "64",
        "--k",
        "0",
        "--replications",
        "4",
        "--seed",
        "1",
        "--cap",
        "5",
    ]);
    assert_eq!(code, 3);
    assert!(err.contains("replication 0"), "{err}");
}

#[test]
fn verify_pass_and_self_test() {
    let base = [
        "verify",
        "--process",
        "level-chain",
        "--probs",
        "0.2,0.2,0.2,0.2,0.2",
        "--delta",
        "0.5,1,2,4,8",
        "--seed",
        "4",
        "--replications",
        "20000",
        "--workers",
        "2",
    ];
    let (code, out, err) = geotail(&base);
    assert_eq!(code, 0, "{out}{err}");
    let rows = csv_rows(&out);
    assert_eq!(
        rows[0],
        vec![
            "tail",
            "delta_or_r",
            "closed_form_bound",
            "chernoff_bound",
            "exact_tail",
            "empirical_tail",
            "empirical_se",
            "verdict"
        ]
    );
    assert_eq!(rows.len(), 11);
    assert!(rows[1..].iter().all(|r| r[7] == "pass"));

    let mut corrupted = base.to_vec();
    corrupted.push("--self-test");
    let (code, out, _) = geotail(&corrupted);
    assert_eq!(code, 1);
    assert!(out.contains(",fail\n"));
}

#[test]
fn verify_onemax_r_grid() {
    let (code, out, err) = geotail(&[
        "verify",
        "--process",
        "rls-onemax",
        "--n",
        "6",
        "--k",
        "0",
        "--r",
        "0.5,1,2",
        "--seed",
        "1",
        "--replications",
        "100000",
        "--workers",
        "4",
    ]);
    assert_eq!(code, 0, "{out}{err}");
    assert_eq!(out.matches(",pass\n").count(), 6);
}

#[test]
fn verify_oracle_column_absent_when_infeasible() {
    let (code, out, err) = geotail(&[
        "verify",
        "--process",
        "level-chain",
        "--spec",
        "onemax:20000:0",
        "--delta",
        "1000",
        "--seed",
        "1",
        "--oracle-only",
    ]);
    assert_eq!(code, 0, "{err}");
    let rows = csv_rows(&out);
    assert_eq!(rows[1][4], "");
    assert_eq!(rows[1][5], "");
}

#[test]
fn outputs_are_byte_identical_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for workers in ["1", "3"] {
        let path = dir.path().join(format!("w{workers}.json"));
        let (code, _, _) = geotail(&[
            "simulate",
            "--process",
            "rls-onemax",
            "--n",
            "40",
            "--replications",
            "3000",
            "--seed",
            "77",
            "--workers",
            workers,
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        files.push(fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1]);
}
