use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    run_with_threads(args, None)
}

fn run_with_threads(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_supergeom"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t.to_string());
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn config(name: &str, body: &str) -> PathBuf {
    let path =
        std::env::temp_dir().join(format!("supergeom-cli-{}-{name}.json", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn gamma_value() {
    let out = run(&["gamma", "--p", "1", "--q", "1", "--m", "3,2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "gamma");
    assert!((v["value"].as_f64().unwrap() - 2.0).abs() < 1e-14);
    assert_eq!(v["is_pole"], false);
}

#[test]
fn gamma_pole_is_not_an_error() {
    let out = run(&["gamma", "--p", "1", "--q", "0", "--m", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["is_pole"], true);
    assert!(v["value"].is_null());
}

#[test]
fn negative_fermionic_exponents_parse() {
    let out = run(&["gamma", "--p", "1", "--q", "1", "--m", "2,-1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["inputs"]["m"][1], -1.0);
}

#[test]
fn verify_sbos_matches_closed_form() {
    let out = run(&[
        "verify-sbos",
        "--p",
        "1",
        "--q",
        "1",
        "--n",
        "1",
        "--x",
        "diag:2,1",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["command"], "verify-sbos");
    assert_eq!(v["pass"], true);
    assert_eq!(v["seed"], 7);
    let half_sqrt_pi = std::f64::consts::PI.sqrt() / 2.0;
    for c in v["comparisons"].as_array().unwrap() {
        for side in ["computed", "reference"] {
            let re = c[side][0]["re"].as_f64().unwrap();
            assert!((re - half_sqrt_pi).abs() < 1e-10, "{side}: {re}");
        }
    }
}

#[test]
fn domain_error_exits_two() {
    // Γ diverges for m₁ ≤ 0 on the cone.
    let out = run(&["verify-gamma", "--p", "1", "--q", "0", "--m", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["gamma", "--p", "1"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    let bad = config("malformed", "{\"cases\": [");
    let out = run(&["--config", bad.to_str().unwrap(), "suite"]);
    assert_eq!(out.status.code(), Some(2));
    let unknown = config("unknown-kind", r#"{"cases":[{"kind":"nope"}]}"#);
    assert_eq!(
        run(&["--config", unknown.to_str().unwrap(), "suite"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn empty_suite_passes() {
    let cfg = config("empty", r#"{"cases":[]}"#);
    let out = run(&["--config", cfg.to_str().unwrap(), "suite"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["cases"].as_array().unwrap().len(), 0);
}

#[test]
fn undersampled_monte_carlo_fails() {
    let cfg = config(
        "undersampled",
        r#"{"mc_samples":10,"cases":[{"criterion":2,"kind":"gamma","p":1,"q":2,"m":[3,3,3]}]}"#,
    );
    let out = run(&["--config", cfg.to_str().unwrap(), "suite"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let case = &v["cases"][0];
    assert_eq!(case["pass"], false);
    let cmp = &case["report"]["comparisons"][0];
    let stderr = cmp["stderr"][0].as_f64().unwrap();
    let reference = cmp["reference"][0]["re"].as_f64().unwrap();
    assert!(
        stderr > reference.abs(),
        "stderr {stderr} vs reference {reference}"
    );
}

#[test]
fn flags_override_config() {
    let cfg = config(
        "override",
        r#"{"seed":1,"cases":[{"kind":"gamma","p":1,"q":0,"m":[3]}]}"#,
    );
    let out = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--tol",
        "1e-3",
        "suite",
    ]);
    let v = json(&out);
    let report = &v["cases"][0]["report"];
    assert_eq!(report["seed"], 9);
    assert_eq!(report["comparisons"][0]["tolerance"]["tol"], 1e-3);
}

#[test]
fn output_is_deterministic_across_runs_and_workers() {
    let cfg = config(
        "determinism",
        r#"{"mc_samples":20000,"cases":[
            {"kind":"gamma","p":1,"q":2,"m":[3,3,3]},
            {"kind":"sbos","p":1,"q":1,"n":2,"x":"1.5,0.3:0.2*t1;-0.6*t2,0.8","odd_params":2}
        ]}"#,
    );
    let args = ["--config", cfg.to_str().unwrap(), "--seed", "3", "suite"];
    let a = run_with_threads(&args, Some(1));
    let b = run_with_threads(&args, Some(3));
    let c = run_with_threads(&args, Some(3));
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(b.stdout, c.stdout);
}
