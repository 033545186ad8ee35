use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn possal(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_possal")).args(args).current_dir(cwd).output().expect("binary runs")
}

const CONFIG: &str = r#"{
    "name": "corner",
    "dataset": {"kind": "block", "variant": "corner"},
    "acquisitions": ["random", "necessity"],
    "n_runs": 3, "n_queries": 3, "train_pool_size": 30, "test_size": 40,
    "kernel": {"lengthscale": 1.0},
    "link": "logistic",
    "master_seed": 0
}"#;

#[test]
fn missing_config_exits_with_usage() {
    let dir = TempDir::new().unwrap();
    let out = possal(&["run", "--config", "nope.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn invalid_config_exits_2() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("c.json"), CONFIG.replace("\"n_queries\": 3", "\"n_queries\": 300")).unwrap();
    let out = possal(&["run", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_summarize_and_export() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("c.json"), CONFIG).unwrap();
    for out in ["a", "b"] {
        let o = possal(&["run", "--config", "c.json", "--seed", "7", "--out", out], d);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["corner__random.jsonl", "corner__necessity.jsonl"] {
        let a = fs::read(d.join("a").join(f)).unwrap();
        assert_eq!(a, fs::read(d.join("b").join(f)).unwrap(), "{f}");
        assert_eq!(a.iter().filter(|&&b| b == b'\n').count(), 3);
    }

    let o = possal(&["summarize", "--results", "a"], d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(d.join("a/summary.csv")).unwrap();
    assert!(summary.starts_with("dataset,acquisition,n_ok,n_failed,final_median"));
    assert_eq!(summary.lines().count(), 3);
    assert_eq!(fs::read_to_string(d.join("a/ranks.csv")).unwrap().lines().count(), 3);

    let o = possal(&["export-plot", "--results", "a", "--out", "plot.csv"], d);
    assert!(o.status.success());
    let plot = fs::read_to_string(d.join("plot.csv")).unwrap();
    assert_eq!(plot.lines().next(), Some("step,acquisition,median,q1,q3"));
    assert_eq!(plot.lines().count(), 1 + 2 * 4);

    let o = possal(&["export-plot", "--results", "a", "--dataset", "other", "--out", "p2.csv"], d);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gen_data_writes_loadable_csv() {
    let dir = TempDir::new().unwrap();
    for (kind, rows, classes) in [("block-center", 350, 2), ("block-corner", 350, 2), ("blobs", 180, 3)] {
        let path = dir.path().join(format!("{kind}.csv"));
        let o = possal(&["gen-data", "--kind", kind, "--seed", "3", "--out", path.to_str().unwrap()], dir.path());
        assert!(o.status.success());
        let ds = possal_harness::load_csv(&path).unwrap();
        assert_eq!((ds.len(), ds.n_classes()), (rows, classes));
    }
}
