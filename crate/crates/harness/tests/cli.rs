//! End-to-end tests of the `hypercover` binary: generate, validate, run,
//! bench, stdin plumbing, and exit codes.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypercover"))
}

fn run_with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn gen_check_run_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.trace");
    let metrics = dir.path().join("m.json");

    let out = bin()
        .args([
            "gen",
            "--n",
            "12",
            "--f",
            "3",
            "--updates",
            "80",
            "--seed",
            "5",
        ])
        .args(["--out", trace.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());

    let out = bin()
        .args(["check", trace.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(
        line.contains("n=12 f=3 updates=80"),
        "unexpected summary: {line}"
    );

    let out = bin()
        .args(["run", trace.to_str().unwrap(), "--check", "full"])
        .args(["--out", metrics.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&metrics).unwrap()).unwrap();
    assert_eq!(m["n"], 12);
    assert_eq!(m["T"], 80);
    assert!(m["checks_passed"].as_u64().unwrap() >= 80);
}

#[test]
fn identical_runs_differ_only_in_wall_time() {
    let gen = bin()
        .args([
            "gen",
            "--n",
            "14",
            "--f",
            "2",
            "--updates",
            "120",
            "--seed",
            "3",
        ])
        .output()
        .unwrap();
    let trace = String::from_utf8(gen.stdout).unwrap();

    let mut a = stdout_json(&run_with_stdin(&["run", "--check", "light"], &trace));
    let mut b = stdout_json(&run_with_stdin(&["run", "--check", "light"], &trace));
    a.as_object_mut().unwrap().remove("wall_ms");
    b.as_object_mut().unwrap().remove("wall_ms");
    assert_eq!(a, b);
}

#[test]
fn run_reads_stdin_by_default() {
    let out = run_with_stdin(&["run"], "init 4 2\n+ 0 1\n- 1\n");
    let m = stdout_json(&out);
    assert_eq!(m["T"], 2);
    assert_eq!(m["C_up"], "1");
    assert_eq!(m["matching_value"], "0/289");
}

#[test]
fn malformed_traces_exit_nonzero_with_line_numbers() {
    let out = run_with_stdin(&["check"], "init 4 2\n- 7\n");
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "missing line number: {err}");

    let out = run_with_stdin(&["run"], "init 4 2\n+ 0 1 2\n");
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "missing line number: {err}");
}

#[test]
fn bench_reports_per_trace_metrics() {
    let out = bin()
        .args([
            "bench",
            "--n",
            "32",
            "--f",
            "3",
            "--updates",
            "200",
            "--seed",
            "11",
        ])
        .args(["--jobs", "3"])
        .output()
        .unwrap();
    let summary = stdout_json(&out);
    assert_eq!(summary["jobs"], 3);
    assert_eq!(summary["traces"].as_array().unwrap().len(), 3);
    assert_eq!(summary["total_updates"], 600);
}
