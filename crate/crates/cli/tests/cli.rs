use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dbl_core::label::LabelFamily;
use dbl_core::toy::{self, v};
use dbl_core::{write_snapshot, IdMap};
use serde_json::Value;

fn dbl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbl"))
        .args(args)
        .env_remove("DBL_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

/// The example graph with original ids 1..=11, saved with its example index.
fn toy_snapshot(dir: &Path, corrupt: bool) -> PathBuf {
    let g = toy::graph();
    let mut idx = toy::index(&g);
    if corrupt {
        // v10 is a sink, so the bad bit only misleads queries ending there
        idx.toggle_bit(LabelFamily::DlIn, v(10), 0);
        idx.toggle_bit(LabelFamily::DlOut, v(3), 0);
    }
    let ids = IdMap::from_originals((1..=11).collect());
    let p = dir.join(if corrupt { "bad.idx" } else { "toy.idx" });
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &idx, Some((&g, &ids))).unwrap();
    fs::write(&p, buf).unwrap();
    p
}

const TOY_EDGES: &str = "1 4\n2 5\n2 6\n3 7\n4 8\n5 6\n5 8\n6 9\n7 11\n8 10\n9 5\n9 11\n";

#[test]
fn build_then_query_saved_index() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g.txt", TOY_EDGES);
    let idx = dir.path().join("g.idx");
    let o = dbl(&["build", graph.to_str().unwrap(), "--k", "2", "--kprime", "2", "-o", idx.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&o);
    assert_eq!(summary["n"], 11);
    assert_eq!(summary["m"], 12);
    assert_eq!(summary["k"], 2);

    let qs = write(dir.path(), "q.txt", "1 10\n4 6\n3 11\n11 3\n");
    let o = dbl(&["query", idx.to_str().unwrap(), qs.to_str().unwrap(), "--workers", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "u,v,reachable,answered_by,visited");
    let answers: Vec<_> = lines[1..].iter().map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(answers, ["true", "false", "true", "false"]);

    let o = dbl(&["query", graph.to_str().unwrap(), qs.to_str().unwrap(), "--format", "json", "--k", "2"]);
    assert!(o.status.success());
    let out = json(&o);
    assert_eq!(out["outcomes"].as_array().unwrap().len(), 4);
    assert_eq!(out["stats"]["queries"], 4);
}

#[test]
fn bench_on_example_index_reports_two_thirds() {
    let dir = tempfile::tempdir().unwrap();
    let idx = toy_snapshot(dir.path(), false);
    let pairs = write(dir.path(), "p.txt", "1 10\n4 6\n3 11\n");
    let o = dbl(&["bench", idx.to_str().unwrap(), "--pairs", pairs.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&o);
    let rho = report["query"]["rho"].as_f64().unwrap();
    assert!((rho - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["query"]["answered_by"]["BFS_POSITIVE"], 1);
}

#[test]
fn bench_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g.txt", TOY_EDGES);
    let args = [
        "bench", graph.to_str().unwrap(), "--k", "2", "--kprime", "4", "--queries", "300",
        "--inserts", "10", "--seed", "3", "--distances", "2,unreachable", "--distance-count", "5",
    ];
    let strip = |mut v: Value| {
        v["build_ms"] = Value::Null;
        v["updates"]["insert_ms"] = Value::Null;
        v["query"]["query_ms"] = Value::Null;
        for d in v["distances"].as_array_mut().unwrap() {
            d["query"]["query_ms"] = Value::Null;
        }
        v
    };
    let a = strip(json(&dbl(&args)));
    let b = strip(json(&dbl(&args)));
    assert_eq!(a, b);
    assert_eq!(a["updates"]["inserts"], 10);
    assert_eq!(a["distances"][1]["class"], "unreachable");
}

#[test]
fn update_stream_with_log() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g.txt", TOY_EDGES);
    let stream = write(dir.path(), "s.txt", "? 3 2\n+ 11 2\n? 3 2\n+ 12 1\n");
    let saved = dir.path().join("after.idx");
    let o = dbl(&[
        "update", graph.to_str().unwrap(), stream.to_str().unwrap(), "--k", "2", "--log", "-o",
        saved.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let records: Vec<Value> = text.lines().take(4).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records[0]["reachable"], false);
    assert_eq!(records[2]["reachable"], true);
    let rest: String = text.lines().skip(4).collect::<Vec<_>>().join("\n");
    let summary: Value = serde_json::from_str(&rest).unwrap();
    assert_eq!(summary["inserts"], 2);
    assert_eq!(summary["created_vertices"], 1);

    let qs = write(dir.path(), "q.txt", "12 10\n");
    let o = dbl(&["query", saved.to_str().unwrap(), qs.to_str().unwrap()]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("12,10,true"));
}

#[test]
fn deletions_need_flag() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g.txt", TOY_EDGES);
    let stream = write(dir.path(), "s.txt", "- 6 9\n? 6 11\n");
    let o = dbl(&["update", graph.to_str().unwrap(), stream.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = dbl(&["update", graph.to_str().unwrap(), stream.to_str().unwrap(), "--allow-delete", "--log"]);
    assert!(o.status.success());
    let second: Value = serde_json::from_str(stdout(&o).lines().nth(1).unwrap()).unwrap();
    assert_eq!(second["reachable"], false);
}

#[test]
fn replay_rows_and_verification() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t.txt", "1 2 10\n2 3 20\n3 1 30\n3 4 40\n");
    let o = dbl(&["replay", t.to_str().unwrap(), "--warm", "0", "--report-every", "2", "--k", "2", "--verify"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&o);
    assert_eq!(report["replay"].as_array().unwrap().len(), 2);
    assert_eq!(report["updates"]["inserts"], 4);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dbl(&["verify", "--graphs", "3", "--max-n", "30", "--k", "8", "--kprime", "8"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["graphs"], 3);

    let good = toy_snapshot(dir.path(), false);
    assert_eq!(dbl(&["verify", good.to_str().unwrap()]).status.code(), Some(0));
    let bad = toy_snapshot(dir.path(), true);
    let o = dbl(&["verify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(json(&o)["disagreements"].as_u64().unwrap() > 0);
}

#[test]
fn usage_and_io_errors_exit_one() {
    assert_eq!(dbl(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(dbl(&["build"]).status.code(), Some(1));
    assert_eq!(dbl(&["build", "/nonexistent/graph.txt"]).status.code(), Some(1));
    assert_eq!(dbl(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "g.txt", "1 2\nx y\n");
    let o = dbl(&["build", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}
