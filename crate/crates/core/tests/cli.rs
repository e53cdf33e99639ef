use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dqc1::cli::Manifest;
use dqc1::svm::SvmModel;

fn dqc1(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqc1"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = dqc1(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    dqc1(dir, args).status.code().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn diagonal(csv: &str) -> Vec<String> {
    csv.lines()
        .skip(1)
        .enumerate()
        .map(|(i, line)| line.split(',').nth(i).unwrap().to_string())
        .collect()
}

#[test]
fn gen_data_sizes_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen-data", "--dataset", "moons", "--zeta", "0.1", "--n", "2000", "--seed", "7"];
    let summary = ok(dir.path(), &args);
    assert!(summary.contains("train 1600"), "{summary}");
    let train = read(dir.path(), "train.csv");
    let test = read(dir.path(), "test.csv");
    assert_eq!(train.lines().count(), 1601);
    assert_eq!(test.lines().count(), 401);
    assert!(dir.path().join("scaler.json").exists());

    ok(dir.path(), &args);
    assert_eq!(read(dir.path(), "train.csv"), train);
    assert_eq!(read(dir.path(), "test.csv"), test);

    let m = Manifest::load(dir.path()).unwrap();
    let rec = m.command("gen-data").unwrap();
    assert_eq!(rec.config.seed, 7);
    assert!(rec.timings_s.contains_key("total"));
    assert_eq!(m.library_version, dqc1::VERSION);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(dir.path(), &["gen-data", "--zeta", "-0.1"]), 1);
    assert_eq!(code(dir.path(), &["gen-data", "--n", "7"]), 1);
    assert_eq!(code(dir.path(), &["no-such-command"]), 1);
    assert_eq!(code(dir.path(), &["gram"]), 2);
    assert_eq!(code(dir.path(), &["--help"]), 0);

    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    assert_eq!(code(&blocker.join("sub"), &["gen-data", "--n", "20"]), 2);

    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, "{\"zeta\": 0.1,\n \"bogus\": 3}").unwrap();
    assert_eq!(code(dir.path(), &["gen-data", "--config", cfg.to_str().unwrap()]), 1);
    assert_eq!(code(dir.path(), &["gen-data", "--config", "/nonexistent/c.json"]), 2);
}

#[test]
fn gram_modes_write_expected_diagonals() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen-data", "--zeta", "0", "--n", "60", "--seed", "1"]);

    ok(d, &["gram", "--register", "mixed", "--mode", "exact"]);
    let csv = read(d, "gram_train.csv");
    assert!(diagonal(&csv).iter().all(|v| v == "1"), "{:?}", diagonal(&csv));
    assert_eq!(csv.lines().count(), 49);
    assert_eq!(read(d, "gram_test.csv").lines().count(), 13);
    let bin = fs::read(d.join("gram_test.bin")).unwrap();
    assert_eq!(bin.len(), 16 + 12 * 48 * 8);

    ok(d, &["gram", "--mode", "noisy", "--noise-p", "0.1"]);
    assert!(diagonal(&read(d, "gram_train.csv")).iter().all(|v| v == "0.531441"));

    ok(d, &["gram", "--mode", "sampled", "--epsilon", "0.05", "--delta", "0.01"]);
    let m = Manifest::load(d).unwrap();
    let details = &m.command("gram").unwrap().details;
    assert_eq!(details["shots_needed"], 4239);
    assert_eq!(details["params"]["shots_x"], 4239);

    assert_eq!(code(d, &["gram", "--mode", "noisy"]), 1);
    assert_eq!(code(d, &["gram", "--mode", "exact", "--noise-p", "0.1"]), 1);
}

#[test]
fn train_eval_report_and_boundary_grid() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen-data", "--dataset", "circles", "--zeta", "0.05", "--n", "80", "--seed", "2"]);
    ok(d, &["gram", "--register", "pure"]);
    let line = ok(d, &["train-eval", "--c", "0.1,1,10"]);
    assert!(line.contains("train="), "{line}");
    let report: serde_json::Value = serde_json::from_str(&read(d, "report.json")).unwrap();
    for key in ["train_score", "test_score", "n_support", "solver", "c_scan"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    let first = read(d, "report.json");
    ok(d, &["train-eval", "--c", "0.1,1,10"]);
    assert_eq!(read(d, "report.json"), first);

    // A starved solver still reports, flagged as unconverged.
    ok(d, &["train-eval", "--c", "1000", "--tol", "1e-300", "--max-passes", "1"]);
    let report: serde_json::Value = serde_json::from_str(&read(d, "report.json")).unwrap();
    assert_eq!(report["converged"], false);

    ok(d, &["boundary-grid", "--resolution", "3"]);
    let grid = read(d, "boundary.csv");
    assert_eq!(grid.lines().next().unwrap(), "x,y,decision_value,predicted_label");
    assert_eq!(grid.lines().count(), 10);
    assert_eq!(code(d, &["boundary-grid", "--resolution", "1"]), 1);

    ok(d, &["boundary-grid", "--resolution", "20"]);
    let pts: Vec<[f64; 2]> = read(d, "boundary.csv")
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').take(2).map(|v| v.parse().unwrap()).collect();
            [f[0], f[1]]
        })
        .collect();
    let train = dqc1::datasets::load_csv(&d.join("train.csv")).unwrap();
    for p in &train.points {
        for k in 0..2 {
            assert!(pts.iter().any(|g| g[k] <= p[k]) && pts.iter().any(|g| g[k] >= p[k]));
        }
    }

    // Zero multipliers and a positive offset predict +1 everywhere.
    let mut model: SvmModel = serde_json::from_str(&read(d, "model.json")).unwrap();
    model.alphas.iter_mut().for_each(|a| *a = 0.0);
    model.bias = 1.0;
    fs::write(d.join("model.json"), serde_json::to_string(&model).unwrap()).unwrap();
    ok(d, &["boundary-grid", "--resolution", "3"]);
    let labels: Vec<String> = read(d, "boundary.csv")
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().to_string())
        .collect();
    assert_eq!(labels, vec!["1"; 9]);
}

#[test]
fn fidelity_sweep_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["fidelity-sweep", "--p-values", "0,0.1,0.3"]);
    let csv = read(d, "fidelity.csv");
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][1], 1.0);
    assert!((rows[1][1] - 0.425_943_629_185).abs() < 1e-11);
    assert!(rows.iter().all(|r| (r[1] - r[2]).abs() <= 1e-9));
    assert_eq!(code(d, &["fidelity-sweep", "--p-values", "1.0"]), 1);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = d.join("exp.json");
    fs::write(&cfg, r#"{"dataset": "circles", "zeta": 0.05, "n": 40, "seed": 3}"#).unwrap();
    ok(d, &["gen-data", "--config", cfg.to_str().unwrap(), "--zeta", "0"]);
    let rec = Manifest::load(d).unwrap().command("gen-data").unwrap().clone();
    assert_eq!(rec.config.zeta, 0.0);
    assert_eq!(rec.config.n, 40);
    let train = dqc1::datasets::load_csv(&d.join("train.csv")).unwrap();
    assert!(train.points.iter().all(|p| {
        let r = p[0].hypot(p[1]);
        (r - 1.0).abs() < 1e-9 || (r - 0.8).abs() < 1e-9
    }));

    // The resolved config written to the manifest is itself a valid config.
    let resolved = d.join("resolved.json");
    fs::write(&resolved, rec.config.to_json()).unwrap();
    ok(d, &["gen-data", "--config", resolved.to_str().unwrap()]);
    assert_eq!(Manifest::load(d).unwrap().command("gen-data").unwrap().config, rec.config);
}

#[test]
fn reproduce_tables_small_run_layout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["reproduce-tables", "--n", "100", "--threads", "2"]);
    let moons = read(d, "moons.csv");
    let mut lines = moons.lines();
    assert_eq!(
        lines.next().unwrap(),
        "row,zeta=0 train,zeta=0 test,zeta=0.1 train,zeta=0.1 test,zeta=0.15 train,zeta=0.15 test,max_abs_diff"
    );
    let labels: Vec<&str> = moons.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        labels,
        ["mixed state", "pure state", "RBF kernel", "mixed state (published)", "pure state (published)", "RBF kernel (published)"]
    );
    assert!(moons.contains("pure state (published),0.96,0.96,0.95,0.92,0.93,0.9,"));
    assert_eq!(read(d, "cells.csv").lines().count(), 19);
    assert!(read(d, "circles.txt").contains("published"));

    let again = tempfile::tempdir().unwrap();
    ok(again.path(), &["reproduce-tables", "--n", "100", "--threads", "1"]);
    for f in ["moons.csv", "circles.csv", "cells.csv"] {
        assert_eq!(read(d, f), read(again.path(), f), "{f}");
    }
}
