use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn qsearch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsearch"))
        .args(args)
        .env_remove("QSEARCH_TOFFOLI_TABLE")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records().map(|r| r.unwrap()).collect()
}

/// A depth table file unique to this test.
fn table_file(name: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("qsearch-{}-{name}.csv", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

const LINEAR: &str = "2,1\n3,5\n4,13\n5,29\n6,61\n7,120\n8,160\n9,200\n10,240\n";

#[test]
fn grover_table_as_markdown() {
    let text = stdout(&qsearch(&["tables", "--table", "grover", "--n-max", "6"]));
    assert!(text.contains("| 4 | S_4(1,0) | 0.473 | 30 | 63.47 |"), "{text}");
    assert!(text.contains("| 6 | S_6(4,0) | 0.816 | 504 | 617.36 |"), "{text}");
}

#[test]
fn csv_keeps_full_precision() {
    let text = stdout(&qsearch(&["tables", "--table", "grover", "--format", "csv"]));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 7);
    let theta = 0.25f64.asin();
    let p: f64 = rows[0][2].parse().unwrap();
    assert!((p - (3.0 * theta).sin().powi(2)).abs() < 1e-12);
    let med: f64 = rows[0][4].parse().unwrap();
    assert!((med - 30.0 / p).abs() < 1e-9);
}

#[test]
fn several_tables_in_one_run() {
    let csv = stdout(&qsearch(&["tables", "--n-max", "5", "--format", "csv"]));
    let sections: Vec<&str> = csv.lines().filter(|l| l.starts_with("# ")).collect();
    assert!(sections.len() >= 4, "{sections:?}");

    let json: Value = serde_json::from_str(&stdout(&qsearch(&["tables", "--n-max", "5", "--format", "json"]))).unwrap();
    let obj = json.as_object().unwrap();
    assert!(obj.len() >= 4);
    assert!(obj.values().all(|v| v.as_array().is_some_and(|rows| rows.len() == 2)));
}

#[test]
fn simulate_two_stage_plan() {
    let text = stdout(&qsearch(&[
        "simulate",
        "--sequence",
        "S_{6,4}(1,1) | S_4(2,0)",
        "--format",
        "json",
    ]));
    let row = &serde_json::from_str::<Value>(&text).unwrap()[0];
    assert!((row["block_probability"].as_f64().unwrap() - 0.5604).abs() < 1e-4);
    assert!((row["stage2_probability"].as_f64().unwrap() - 0.9084).abs() < 1e-4);
    assert_eq!(row["depth"].as_f64(), Some(360.0));
}

#[test]
fn full_backend_agrees_with_reduced() {
    let get = |backend: &str| -> f64 {
        let text = stdout(&qsearch(&[
            "simulate",
            "--sequence",
            "S_{7,4}(1,1,2,1,2)",
            "--backend",
            backend,
            "--target",
            "1011001",
            "--format",
            "json",
        ]));
        serde_json::from_str::<Value>(&text).unwrap()[0]["probability"]
            .as_f64()
            .unwrap()
    };
    assert!((get("reduced") - get("full")).abs() < 1e-10);
}

#[test]
fn critical_ratio_and_absent_case() {
    let text = stdout(&qsearch(&["critical", "--n", "4", "--format", "csv"]));
    let a: f64 = csv_rows(&text)[0][2].parse().unwrap();
    assert!((a - 2.07).abs() < 0.01);
    let text = stdout(&qsearch(&[
        "critical",
        "--n",
        "4",
        "--mode",
        "two-stage",
        "--format",
        "csv",
    ]));
    assert_eq!(&csv_rows(&text)[0][2], "NA");
}

#[test]
fn parallel_guess_warns_when_guessing_most_bits() {
    let text = stdout(&qsearch(&[
        "parallel",
        "--n",
        "8",
        "--strategy",
        "guess",
        "--machines",
        "4",
        "--guess-bits",
        "5",
        "--format",
        "json",
    ]));
    assert!(text.contains("speedup"), "{text}");
}

#[test]
fn usage_errors_exit_with_2() {
    for args in [
        &["simulate", "--sequence", "S_{4,3}(1,x)"][..],
        &["optimize", "--n", "1"],
        &["critical", "--n", "4", "--mode", "three-stage"],
        &["parallel", "--n", "7", "--machines", "2", "--strategy", "partition"],
        &["simulate", "--sequence", "S_4(1,0)", "--alpha", "-1"],
    ] {
        let out = qsearch(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn verify_passes_on_small_registers() {
    let out = qsearch(&["verify", "--n-min", "4", "--n-max", "6", "--samples", "5"]);
    let text = stdout(&out);
    assert!(text.contains("PASS") && !text.contains("FAIL"), "{text}");
}

#[test]
fn verify_fails_with_exit_3_under_a_wrong_table() {
    let path = table_file("wrong", &LINEAR.replace("4,13", "4,14"));
    let out = Command::new(env!("CARGO_BIN_EXE_qsearch"))
        .args(["verify", "--n-min", "4", "--n-max", "4", "--samples", "2"])
        .env("QSEARCH_TOFFOLI_TABLE", &path)
        .output()
        .unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn depth_table_from_flag_and_environment() {
    let path = table_file("custom", &LINEAR.replace("6,61", "6,98"));
    let args = ["simulate", "--sequence", "S_6(1,0)", "--format", "json"];
    let depth = |out: Output| {
        serde_json::from_str::<Value>(&stdout(&out)).unwrap()[0]["depth"]
            .as_f64()
            .unwrap()
    };

    assert_eq!(depth(qsearch(&args)), 126.0);
    let mut with_flag = vec!["--toffoli-table", path.to_str().unwrap()];
    with_flag.extend(args);
    assert_eq!(depth(qsearch(&with_flag)), 200.0);
    let from_env = Command::new(env!("CARGO_BIN_EXE_qsearch"))
        .args(args)
        .env("QSEARCH_TOFFOLI_TABLE", &path)
        .output()
        .unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(depth(from_env), 200.0);

    let missing = qsearch(&[
        "--toffoli-table",
        "/nonexistent/table.csv",
        "tables",
        "--table",
        "grover",
    ]);
    assert_eq!(missing.status.code(), Some(2));
}
