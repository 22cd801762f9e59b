//! End-to-end tests of the `blockcv` binary: real process spawns, real
//! files, byte-level determinism checks.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn blockcv(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockcv"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary spawns")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn partition_plan_matches_the_design() {
    let dir = tempfile::tempdir().unwrap();
    let out = blockcv(&["partition", "--n", "16", "--seed", "1"], dir.path());
    let text = stdout_of(&out);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();

    let blocks = doc["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 8);
    assert!(blocks.iter().all(|b| b.as_array().unwrap().len() == 2));

    let pairs = doc["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 5);
    for p in pairs {
        assert_eq!(p["train"].as_array().unwrap().len(), 8);
        assert_eq!(p["valid"].as_array().unwrap().len(), 8);
    }

    // The regularized design pins every pairwise training overlap at n/4.
    let overlaps = doc["train_overlaps"].as_array().unwrap();
    for (i, row) in overlaps.iter().enumerate() {
        for (j, cell) in row.as_array().unwrap().iter().enumerate() {
            let expected = if i == j { 8 } else { 4 };
            assert_eq!(cell.as_u64().unwrap(), expected, "overlap[{i}][{j}]");
        }
    }

    // Identical invocations print identical bytes.
    let again = blockcv(&["partition", "--n", "16", "--seed", "1"], dir.path());
    assert_eq!(out.stdout, again.stdout);

    // --out writes exactly the stdout bytes.
    let out_path = dir.path().join("plan.json");
    blockcv(
        &["partition", "--n", "16", "--seed", "1", "--out", "plan.json"],
        dir.path(),
    );
    assert_eq!(fs::read_to_string(&out_path).unwrap(), text);
}

#[test]
fn test_subcommand_compares_algorithms_on_a_csv() {
    let dir = tempfile::tempdir().unwrap();
    // A separable-ish two-class problem: logreg should comfortably beat
    // majority guessing.
    let mut csv = String::from("x1,label\n");
    for i in 0..40 {
        let y = i % 2;
        let x = y as f64 * 2.0 + (i as f64 * 0.37).sin() * 0.8;
        csv.push_str(&format!("{x:.4},{y}\n"));
    }
    fs::write(dir.path().join("d.csv"), csv).unwrap();

    let args = [
        "test",
        "--data",
        "d.csv",
        "--algo-a",
        "majority",
        "--algo-b",
        "logreg",
        "--tests",
        "mcnemar_bcv_5x2,mcnemar_ho",
        "--seed",
        "7",
        "--out",
        "report.json",
    ];
    let out = blockcv(&args, dir.path());
    let text = stdout_of(&out);
    assert!(text.contains("mcnemar_bcv_5x2: statistic="));
    assert!(text.contains("mcnemar_ho: statistic="));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0]["test"], "mcnemar_bcv_5x2");
    assert!(results[0]["result"]["p_value"].is_number());

    // Byte-identical artifact on a repeated run.
    let first = fs::read(dir.path().join("report.json")).unwrap();
    blockcv(&args, dir.path());
    assert_eq!(fs::read(dir.path().join("report.json")).unwrap(), first);

    // Unknown test names are runtime errors (exit 1), not panics.
    let bad = blockcv(
        &["test", "--data", "d.csv", "--algo-a", "majority", "--algo-b", "logreg", "--tests", "anova"],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn simulate_writes_twin_artifacts_and_warns_when_thin() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("eps.json"),
        r#"{
            "generator": "epsilon",
            "n": 60,
            "tests": ["mcnemar_bcv_5x2", "mcnemar_ho"],
            "replications": 20,
            "master_seed": 5
        }"#,
    )
    .unwrap();

    let args = ["simulate", "--config", "eps.json", "--out", "sim.csv"];
    let out = blockcv(&args, dir.path());
    assert!(out.status.success());
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("warning"),
        "20 replications should warn"
    );

    let csv = fs::read_to_string(dir.path().join("sim.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "test,sweep_parameter,sweep_value,resolved_omega,rejections,degenerate,replications,rejection_rate,se"
    );
    assert_eq!(lines.count(), 2);

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sim.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
    assert_eq!(json["master_seed"], 5);

    // Identical invocations leave byte-identical artifacts.
    let (csv1, json1) = (
        fs::read(dir.path().join("sim.csv")).unwrap(),
        fs::read(dir.path().join("sim.json")).unwrap(),
    );
    blockcv(&args, dir.path());
    assert_eq!(fs::read(dir.path().join("sim.csv")).unwrap(), csv1);
    assert_eq!(fs::read(dir.path().join("sim.json")).unwrap(), json1);

    // --reps and --seed override the config.
    let out = blockcv(
        &["simulate", "--config", "eps.json", "--reps", "150", "--seed", "9"],
        dir.path(),
    );
    let text = stdout_of(&out);
    assert!(text.contains(",150,"));
    assert!(!String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn rho_subcommand_writes_scatter_rows() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("sweep_config.json"),
        r#"{
            "generators": ["exp6"],
            "pairs": [
                [{"kind": "majority"}, {"kind": "mean"}],
                [{"kind": "majority"}, {"kind": "majority"}]
            ],
            "n": 32,
            "replications": 30,
            "master_seed": 2
        }"#,
    )
    .unwrap();

    let args = ["rho", "--config", "sweep_config.json", "--out", "rho.csv"];
    let out = blockcv(&args, dir.path());
    assert!(out.status.success());
    // The identical pair is flagged on the console, not in the CSV.
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped"));

    let csv = fs::read_to_string(dir.path().join("rho.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "dataset,algo_a,algo_b,rho1,rho2");
    let row = lines.next().unwrap();
    assert!(row.starts_with("exp6,majority,mean,"));
    assert!(lines.next().is_none());

    // The JSON sibling keeps every job, including the skipped one.
    let points: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rho.json")).unwrap()).unwrap();
    let points = points.as_array().unwrap();
    assert_eq!(points.len(), 2);
    assert!(points[0]["estimate"].is_object());
    assert!(points[1]["estimate"].is_null());
    assert!(points[1]["note"].is_string());

    let first = fs::read(dir.path().join("rho.csv")).unwrap();
    blockcv(&args, dir.path());
    assert_eq!(fs::read(dir.path().join("rho.csv")).unwrap(), first);
}

#[test]
fn calibrate_resolves_the_euclidean_anchor_exactly() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cal.json"),
        r#"{
            "generator": "exp6",
            "algo_a": {"kind": "majority"},
            "algo_b": {"kind": "fnn_weighted", "omega": 1.0},
            "n": 48,
            "tests": ["mcnemar_bcv_5x2"],
            "replications": 3,
            "master_seed": 9,
            "calibration_replications": 2
        }"#,
    )
    .unwrap();

    let out = blockcv(
        &["calibrate", "--config", "cal.json", "--lambda", "1.0"],
        dir.path(),
    );
    let text = stdout_of(&out);
    assert!(text.contains("omega=1.000000"), "got: {text}");

    // Curve mode prints CSV with the expected header.
    let out = blockcv(&["calibrate", "--config", "cal.json"], dir.path());
    let text = stdout_of(&out);
    assert!(text.starts_with("sweep_parameter,sweep_value,mu_a,se_a,mu_b,se_b,replications\n"));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn exit_codes_separate_usage_from_runtime_failures() {
    let dir = tempfile::tempdir().unwrap();
    // Unknown subcommands and flags are usage errors.
    assert_eq!(blockcv(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(
        blockcv(&["partition", "--n", "16", "--frobnicate"], dir.path()).status.code(),
        Some(2)
    );
    // Missing files and invalid configs are runtime errors.
    assert_eq!(
        blockcv(&["simulate", "--config", "missing.json"], dir.path()).status.code(),
        Some(1)
    );
    let ou = blockcv(&["partition", "--n", "4", "--seed", "1"], dir.path());
    assert_eq!(ou.status.code(), Some(1), "n = 4 cannot form eight blocks");
    assert!(String::from_utf8_lossy(&ou.stderr).contains("n"));
}
