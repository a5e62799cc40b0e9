use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn dagw(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dagw"))
        .args(args)
        .current_dir(dir)
        .env("DAGW_THREADS", "2")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = dagw(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Three commands chained on fixed seeds, relative paths so manifests are stable.
fn pipeline(dir: &Path) {
    ok(
        dir,
        &[
            "generate",
            "--p",
            "6",
            "--edge-prob",
            "0.4",
            "--seed",
            "11",
            "--theta",
            "theta.json",
            "--out",
            "graph.json",
        ],
    );
    ok(
        dir,
        &[
            "sample",
            "--theta",
            "theta.json",
            "--n",
            "40",
            "--seed",
            "12",
            "--out",
            "data.csv",
        ],
    );
    ok(
        dir,
        &[
            "fit",
            "--data",
            "data.csv",
            "--graph",
            "graph.json",
            "--estimator",
            "bayes-sigma",
            "--truth",
            "theta.json",
            "--out",
            "fit.json",
        ],
    );
}

const PIPELINE_FILES: [&str; 7] = [
    "graph.json",
    "graph.json.manifest.json",
    "theta.json",
    "data.csv",
    "data.csv.manifest.json",
    "fit.json",
    "fit.json.manifest.json",
];

#[test]
fn outputs_match_golden_files() {
    let tmp = tempfile::tempdir().unwrap();
    pipeline(tmp.path());
    let golden = golden_dir();
    if std::env::var_os("DAGW_UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(&golden).unwrap();
        for f in PIPELINE_FILES {
            std::fs::copy(tmp.path().join(f), golden.join(f)).unwrap();
        }
    }
    for f in PIPELINE_FILES {
        let got = std::fs::read_to_string(tmp.path().join(f)).unwrap();
        let want = std::fs::read_to_string(golden.join(f)).unwrap();
        assert_eq!(got, want, "{f} differs from its golden copy");
    }
}

#[test]
fn replay_reproduces_every_output() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    let before: Vec<Vec<u8>> = PIPELINE_FILES
        .iter()
        .map(|f| std::fs::read(dir.join(f)).unwrap())
        .collect();
    for m in [
        "graph.json.manifest.json",
        "data.csv.manifest.json",
        "fit.json.manifest.json",
    ] {
        ok(dir, &["replay", m, "--check-inputs"]);
    }
    for (f, b) in PIPELINE_FILES.iter().zip(&before) {
        assert_eq!(&std::fs::read(dir.join(f)).unwrap(), b, "{f}");
    }
}

#[test]
fn replay_notices_changed_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    let mut data = std::fs::read_to_string(dir.join("data.csv")).unwrap();
    let row = data.lines().nth(1).unwrap().to_string();
    data.push_str(&row);
    data.push('\n');
    std::fs::write(dir.join("data.csv"), data).unwrap();
    let out = dagw(dir, &["replay", "fit.json.manifest.json", "--check-inputs"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        pipeline(dir);
        ok(
            dir,
            &[
                "select",
                "--data",
                "data.csv",
                "--seed",
                "5",
                "--restarts",
                "4",
                "--steps",
                "10",
                "--out",
                "sel.json",
            ],
        );
    }
    for f in PIPELINE_FILES.iter().chain(&["sel.json", "sel.json.manifest.json"]) {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_dagw"))
            .args([
                "select",
                "--data",
                "data.csv",
                "--seed",
                "9",
                "--restarts",
                "5",
                "--steps",
                "8",
            ])
            .current_dir(dir)
            .env("DAGW_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn select_manifest_records_default_search_settings() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    ok(dir, &["select", "--data", "data.csv", "--out", "sel.json"]);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("sel.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "select");
    let cfg = &m["config"];
    assert_eq!(cfg["restarts"], 16);
    assert_eq!(cfg["steps"], 100);
    assert_eq!(cfg["neighborhood"], 30);
    assert_eq!(cfg["gamma"], 0.5);
    assert_eq!(cfg["b"], 3.0);
    assert_eq!(cfg["c"], 1.0);
    assert_eq!(cfg["kappa_grid"].as_array().unwrap().len(), 16);
    assert!(m["inputs"]["data.csv"].as_str().unwrap().len() == 64);
    let sel: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("sel.json")).unwrap()).unwrap();
    assert!(sel["best"]["score"].as_f64().unwrap().is_finite());
    for e in sel["best"]["graph"]["edges"].as_array().unwrap() {
        assert!(e[0].as_u64().unwrap() > e[1].as_u64().unwrap());
    }
}

#[test]
fn inputs_are_left_untouched() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    let inputs = ["graph.json", "theta.json", "data.csv"];
    let before: Vec<Vec<u8>> = inputs.iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect();
    ok(
        dir,
        &[
            "fit",
            "--data",
            "data.csv",
            "--graph",
            "graph.json",
            "--estimator",
            "map",
            "--out",
            "map.json",
        ],
    );
    ok(
        dir,
        &[
            "select",
            "--data",
            "data.csv",
            "--method",
            "lasso",
            "--out",
            "lasso.json",
        ],
    );
    ok(
        dir,
        &[
            "evaluate",
            "--truth",
            "theta.json",
            "--estimate",
            "map.json",
            "--losses",
            "--data",
            "data.csv",
            "--out",
            "eval.json",
        ],
    );
    for (f, b) in inputs.iter().zip(&before) {
        assert_eq!(&std::fs::read(dir.join(f)).unwrap(), b, "{f}");
    }
}

#[test]
fn stdout_is_used_without_out() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    let out = ok(
        dir,
        &[
            "fit",
            "--data",
            "data.csv",
            "--graph",
            "graph.json",
            "--estimator",
            "mle",
        ],
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["estimator"], "mle");
    assert_eq!(v["estimate"]["p"], 6);
    let entries: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(entries.len(), PIPELINE_FILES.len());
}

#[test]
fn evaluate_reports_recovery_and_losses() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    let out = ok(dir, &["evaluate", "--truth", "graph.json", "--estimate", "graph.json"]);
    let row = csv_row(&out.stdout);
    assert_eq!(row["fp"], "0");
    assert_eq!(row["fn"], "0");
    let tp: u64 = row["tp"].parse().unwrap();
    let tn: u64 = row["tn"].parse().unwrap();
    assert_eq!(tp + tn, 15);
    assert_eq!(row["stein"], "");
    let out = ok(
        dir,
        &[
            "evaluate",
            "--truth",
            "theta.json",
            "--estimate",
            "fit.json",
            "--losses",
            "--data",
            "data.csv",
        ],
    );
    let row = csv_row(&out.stdout);
    assert!(row["stein"].parse::<f64>().unwrap() > 0.0);
    assert!(row["l2"].parse::<f64>().unwrap() > 0.0);
    assert!(row["score"].parse::<f64>().unwrap().is_finite());
}

fn csv_row(bytes: &[u8]) -> std::collections::HashMap<String, String> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().clone();
    let rec = r.records().next().unwrap().unwrap();
    header
        .iter()
        .map(String::from)
        .zip(rec.iter().map(String::from))
        .collect()
}

fn error_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr)
        .unwrap_or_else(|_| panic!("stderr is not JSON: {}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["select"],
        vec!["fit", "--data", "x.csv", "--graph", "g.json", "--estimator", "median"],
        vec!["generate", "--p", "many"],
        vec!["frobnicate"],
    ] {
        let out = dagw(tmp.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_of(&out)["error"], "usage");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn runtime_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    pipeline(dir);
    std::fs::write(dir.join("bad.csv"), "x1,x2\n1,2\n3\n").unwrap();
    std::fs::write(dir.join("cyclic.json"), r#"{"p": 2, "edges": [[1, 2]]}"#).unwrap();
    for args in [
        vec![
            "fit",
            "--data",
            "missing.csv",
            "--graph",
            "graph.json",
            "--estimator",
            "mle",
        ],
        vec!["select", "--data", "bad.csv"],
        vec![
            "fit",
            "--data",
            "data.csv",
            "--graph",
            "cyclic.json",
            "--estimator",
            "mle",
        ],
        vec![
            "fit",
            "--data",
            "bad.csv",
            "--graph",
            "graph.json",
            "--estimator",
            "mle",
        ],
    ] {
        let out = dagw(dir, &args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let e = error_of(&out);
        assert!(e["message"].as_str().is_some_and(|m| !m.is_empty()), "{e}");
    }
}

#[test]
fn error_messages_use_one_based_vertices() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("cyclic.json"), r#"{"p": 3, "edges": [[1, 3]]}"#).unwrap();
    std::fs::write(dir.join("d.csv"), "1,2,3\n2,1,0\n0,1,5\n4,4,1\n").unwrap();
    let out = dagw(
        dir,
        &["fit", "--data", "d.csv", "--graph", "cyclic.json", "--estimator", "mle"],
    );
    assert_eq!(out.status.code(), Some(1));
    let msg = error_of(&out)["message"].as_str().unwrap().to_string();
    assert!(msg.contains('3') && msg.contains('1'), "{msg}");
}
