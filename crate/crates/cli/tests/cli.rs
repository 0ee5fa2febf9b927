//! End-to-end checks of the command-line surface and its exit-code
//! contract: 0 accept, 1 reject, 2 config error.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lightlock"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lightlock-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn pv_run_on_bundled_midpoint_accepts() {
    let status = bin()
        .args(["pv", "run", "--scenario"])
        .arg(scenario("pv_1d_midpoint.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn pv_outputs_are_deterministic() {
    let log1 = tmp("pv1.ndjson");
    let log2 = tmp("pv2.ndjson");
    let svg1 = tmp("pv1.svg");
    let svg2 = tmp("pv2.svg");
    for (log, svg) in [(&log1, &svg1), (&log2, &svg2)] {
        let status = bin()
            .args(["pv", "run", "--scenario"])
            .arg(scenario("pv_1d_midpoint.json"))
            .arg("--log")
            .arg(log)
            .arg("--svg")
            .arg(svg)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&log1).unwrap(), std::fs::read(&log2).unwrap());
    assert_eq!(std::fs::read(&svg1).unwrap(), std::fs::read(&svg2).unwrap());
}

#[test]
fn pc_commit_and_reveal_contract() {
    let rho = tmp("rho.pcmt");
    let opening = tmp("open.bin");
    let status = bin()
        .args(["pc", "commit", "--scenario"])
        .arg(scenario("pc_s9_line.json"))
        .arg("--out")
        .arg(&rho)
        .arg("--opening")
        .arg(&opening)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    // Correct claimed point accepts.
    let status = bin()
        .args(["pc", "reveal", "--rho"])
        .arg(&rho)
        .args(["--alpha", "4", "--opening"])
        .arg(&opening)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    // Wrong index rejects with exit 1.
    let status = bin()
        .args(["pc", "reveal", "--rho"])
        .arg(&rho)
        .args(["--alpha", "3", "--opening"])
        .arg(&opening)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn pc_opt_run_emits_profile() {
    let profile = tmp("profile.csv");
    let status = bin()
        .args(["pc-opt", "run", "--scenario"])
        .arg(scenario("pc_opt_line.json"))
        .arg("--profile")
        .arg(&profile)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(&profile).unwrap();
    assert!(csv.starts_with("tick,party,ops\n"));
}

#[test]
fn config_errors_exit_two_with_pointer() {
    let bad = tmp("bad.json");
    std::fs::write(&bad, r#"{"d":2,"verifiers":[[0]],"target":{"L":[1,1],"t":5},"n":4,"r":1,"seed":1}"#)
        .unwrap();
    let output = bin()
        .args(["pv", "run", "--scenario"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("/verifiers/0"), "stderr: {stderr}");
}

#[test]
fn missing_file_exits_two() {
    let status = bin()
        .args(["pv", "run", "--scenario", "/nonexistent/nope.json"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_attack_exits_two() {
    let status = bin()
        .args(["attack", "run", "--name", "nonsense", "--trials", "1", "--seed", "1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn attack_report_schema() {
    let report = tmp("attack.json");
    let status = bin()
        .args(["attack", "run", "--name", "classical-copy", "--trials", "20", "--seed", "3"])
        .arg("--report")
        .arg(&report)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    for key in ["name", "trials", "successes", "rate", "ci95"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["successes"], v["trials"]);
}

#[test]
fn attack_results_are_job_count_independent() {
    let run = |jobs: &str| {
        let out = bin()
            .args(["attack", "run", "--name", "intercept-resend", "--trials", "40"])
            .args(["--seed", "9", "--jobs", jobs])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn schema_prints_valid_json() {
    let output = bin().arg("schema").output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["title"], "Lightlock scenario configuration");
}
