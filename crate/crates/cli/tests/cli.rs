use std::path::PathBuf;
use std::process::{Command, Output};

fn twistorlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistorlab"))
        .args(args)
        .env_remove("TWISTORLAB_TOLERANCE_SCALE")
        .output()
        .unwrap()
}

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/scenarios")
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("twistorlab-cli-{}-{name}.json", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn bundled_run_matches_golden() {
    let config = scenarios().join("homothetic.json");
    let out = twistorlab(&["run", "--config", config.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let golden = std::fs::read(scenarios().join("golden/homothetic.report.json")).unwrap();
    assert!(out.stdout == golden, "stdout differs from golden");
}

#[test]
fn bundled_name_is_accepted_and_formats_differ() {
    let csv = twistorlab(&["run", "--config", "algebra", "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    assert!(String::from_utf8(csv.stdout).unwrap().starts_with("scenario,id,"));
    let text = twistorlab(&["run", "--config", "algebra", "--format", "text", "--seed", "7"]);
    assert_eq!(text.status.code(), Some(0));
    assert!(String::from_utf8(text.stdout).unwrap().contains("checks passed"));
}

#[test]
fn listings_cover_registry_and_bundle() {
    let checks = String::from_utf8(twistorlab(&["list-checks"]).stdout).unwrap();
    for id in ["prop-j1", "harmonicity", "ver-ver-ii", "isoclinic"] {
        assert!(checks.lines().any(|l| l.starts_with(id)), "{id} missing");
    }
    let names = String::from_utf8(twistorlab(&["list-scenarios"]).stdout).unwrap();
    assert_eq!(names.lines().count(), 10);
    assert!(names.contains("round-s4"));
}

#[test]
fn failing_check_exits_one() {
    // a diagonal pair is not conformal, so asking for a vanishing J1 residual must fail
    let path = write_config(
        "fail",
        r#"{ "schema": "twistorlab.scenario/1", "name": "fail", "n": 4, "samples": 8,
             "metric_g": { "builtin": "flat" },
             "metric_gtilde": { "builtin": "diag", "entries": [1, 1, 1, 4] },
             "checks": [{ "id": "prop-j1", "expect": "small", "bound": 1e-6 }] }"#,
    );
    let out = twistorlab(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["summary"]["failed"], 1);
}

#[test]
fn bad_input_exits_two() {
    let path = write_config(
        "unknown",
        r#"{ "schema": "twistorlab.scenario/1", "name": "x", "n": 4,
             "metric_g": { "builtin": "flat" }, "metric_gtilde": { "builtin": "flat" },
             "checks": ["no-such-check"] }"#,
    );
    let out = twistorlab(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-such-check"));
    let out = twistorlab(&["run", "--config", "algebra", "--format", "yaml"]);
    assert_eq!(out.status.code(), Some(2));
    let out = twistorlab(&["run", "--config", "does-not-exist"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tolerance_scale_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_twistorlab"))
        .args(["run", "--config", "algebra"])
        .env("TWISTORLAB_TOLERANCE_SCALE", "-1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
