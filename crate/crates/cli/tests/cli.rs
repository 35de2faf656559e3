use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::tempdir;

fn corpus(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios").join(file)
}

fn icnsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icnsim"))
        .args(args)
        .env_remove("ICNSIM_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn run_writes_trace_and_report() {
    let dir = tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let report = dir.path().join("report.json");
    let scenario = corpus("maas_demo.toml");
    let o = icnsim(&[
        "run",
        scenario.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["steps"], serde_json::json!([1, 2, 3, 4, 5, 6]));
    let lines = std::fs::read_to_string(&trace).unwrap();
    assert!(lines.lines().count() > 100);
    for line in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["t"].is_u64() && v["node"].is_string() && v["event"]["kind"].is_string());
    }
}

#[test]
fn report_on_stdout_is_deterministic() {
    let scenario = corpus("conference_static.toml");
    let a = icnsim(&["run", scenario.to_str().unwrap()]);
    let b = icnsim(&["run", scenario.to_str().unwrap()]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn oracle_reproduces_the_report() {
    let dir = tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let scenario = corpus("maas_demo.toml");
    let run = icnsim(&["run", scenario.to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert!(run.status.success());
    let oracle = icnsim(&["oracle", trace.to_str().unwrap()]);
    assert!(oracle.status.success(), "{}", stderr(&oracle));
    assert_eq!(stdout(&oracle), stdout(&run));
}

#[test]
fn oracle_flags_inconsistent_traces() {
    let dir = tempdir().unwrap();
    let trace = dir.path().join("bad.jsonl");
    std::fs::write(
        &trace,
        r#"{"t":5,"node":"bob","event":{"kind":"consumer_data","flow":"bob>/x","seq":0,"latency_us":3}}
"#,
    )
    .unwrap();
    let o = icnsim(&["oracle", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("conservation"));
}

#[test]
fn oracle_rejects_malformed_traces() {
    let dir = tempdir().unwrap();
    let trace = dir.path().join("bad.jsonl");
    std::fs::write(&trace, "{\"t\":0}\nnot json\n").unwrap();
    let o = icnsim(&["oracle", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"));
}

#[test]
fn until_shortens_the_run() {
    let scenario = corpus("maas_demo.toml");
    let full = icnsim(&["run", scenario.to_str().unwrap()]);
    let cut = icnsim(&["run", scenario.to_str().unwrap(), "--until", "1000000"]);
    assert!(cut.status.success());
    let sent = |o: &Output| {
        let v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
        v["interests"]["sent"].as_u64().unwrap()
    };
    assert!(sent(&cut) < sent(&full));
}

#[test]
fn seed_override_is_accepted() {
    let scenario = corpus("maas_demo.toml");
    let o = icnsim(&["run", scenario.to_str().unwrap(), "--seed", "7"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn validate_accepts_the_corpus() {
    for file in ["maas_demo.toml", "on_demand.toml", "empty.toml"] {
        let o = icnsim(&["validate", corpus(file).to_str().unwrap()]);
        assert!(o.status.success(), "{file}: {}", stderr(&o));
        assert!(stdout(&o).contains("ok"));
    }
}

#[test]
fn scenario_errors_exit_2_with_a_line() {
    let dir = tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        "seed = 1\nduration_us = 10\n\n[[nodes]]\nid = \"A\"\nrole = \"icn_bs\"\ncpu = 1\nstorage = 1\n\n\
         [[timeline]]\nat = 5\naction = \"ue_detach\"\nue = \"ghost\"\n",
    )
    .unwrap();
    for cmd in ["validate", "run"] {
        let o = icnsim(&[cmd, bad.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        assert!(stderr(&o).contains("line 10"), "{cmd}: {}", stderr(&o));
    }
    let missing = dir.path().join("missing.toml");
    assert_eq!(icnsim(&["validate", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn logging_does_not_change_results() {
    let scenario = corpus("maas_demo.toml");
    let quiet = icnsim(&["run", scenario.to_str().unwrap()]);
    let loud = Command::new(env!("CARGO_BIN_EXE_icnsim"))
        .args(["run", scenario.to_str().unwrap()])
        .env("ICNSIM_LOG", "debug")
        .output()
        .unwrap();
    assert!(loud.status.success());
    assert!(!loud.stderr.is_empty());
    assert_eq!(quiet.stdout, loud.stdout);
}
