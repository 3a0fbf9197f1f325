use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gaitblend(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaitblend"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json summary")
}

fn stderr_json(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).expect("json error")
}

const SHORT: &str =
    "seed = 7\n\n[trial]\nduration = 30.0\nsample_rate = 100.0\n\n[calibration]\nduration = 10.0\n";

#[test]
fn calibrate_then_run() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), SHORT).unwrap();
    let cal = stdout_json(&gaitblend(
        dir.path(),
        &["--config", "cfg.toml", "--out", "out", "calibrate"],
    ));
    let weights = cal["weights"].as_str().unwrap().to_owned();
    assert_eq!(cal["sample_count"], 1000);

    let run = stdout_json(&gaitblend(
        dir.path(),
        &[
            "--config",
            "cfg.toml",
            "--out",
            "out",
            "run",
            "--weights",
            &weights,
            "--ankle",
            "off",
        ],
    ));
    assert_eq!(run["samples"], 3000);
    let csv = std::fs::read_to_string(dir.path().join(run["csv"].as_str().unwrap())).unwrap();
    assert_eq!(csv.lines().count(), 3001);
    assert!(dir.path().join(run["json"].as_str().unwrap()).exists());

    let report = stdout_json(&gaitblend(
        dir.path(),
        &["--out", "rep", "report", "out/trials"],
    ));
    assert_eq!(report["records"], 1);
}

#[test]
fn blend_without_weights_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = stderr_json(&gaitblend(
        dir.path(),
        &["--out", "out", "run", "--strategy", "blend"],
    ));
    assert_eq!(err["status"], "error");
    assert_eq!(err["kind"], "config");
    assert!(!dir.path().join("out/trials").exists());
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "[environment]\nload_mass = -1.0\n",
    )
    .unwrap();
    let err = stderr_json(&gaitblend(dir.path(), &["--config", "bad.toml", "gait"]));
    assert_eq!(err["kind"], "validation");
    assert!(err["message"]
        .as_str()
        .unwrap()
        .contains("environment.load_mass"));

    std::fs::write(dir.path().join("broken.toml"), "[trial\n").unwrap();
    let err = stderr_json(&gaitblend(dir.path(), &["--config", "broken.toml", "gait"]));
    assert_eq!(err["kind"], "parse");
}

#[test]
fn fsm_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), SHORT).unwrap();
    let args = |out: &'static str| {
        [
            "--config",
            "cfg.toml",
            "--out",
            out,
            "run",
            "--strategy",
            "fsm",
            "--trial",
            "5",
        ]
    };
    let a = stdout_json(&gaitblend(dir.path(), &args("a")));
    let b = stdout_json(&gaitblend(dir.path(), &args("b")));
    for key in ["csv", "json"] {
        let pa = dir.path().join(a[key].as_str().unwrap());
        let pb = dir.path().join(b[key].as_str().unwrap());
        assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
    }
    // rerunning into the same directory is an identical rewrite
    stdout_json(&gaitblend(dir.path(), &args("a")));
}

#[test]
fn gait_export_has_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout_json(&gaitblend(
        dir.path(),
        &["--out", "g", "gait", "--trial", "7"],
    ));
    let text = std::fs::read_to_string(dir.path().join(out["csv"].as_str().unwrap())).unwrap();
    assert!(text.starts_with("t,phase,"));
}
