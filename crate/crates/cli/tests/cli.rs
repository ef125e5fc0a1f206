use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn moment(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moment")).args(args).env_remove("MOMENT_THREADS").output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("moment-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn identities_pass() {
    let out = moment(&["identities", "--q", "3,4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["command"], "identities");
    assert_eq!(r["config"]["identities"]["q"], serde_json::json!([3, 4]));
    assert!(r["version"].as_str().unwrap().starts_with("moment-core"));
    assert!(r["checks"].as_array().unwrap().len() > 10);
}

#[test]
fn reports_are_deterministic() {
    let a = report(&moment(&["identities", "--q", "5", "--seed", "3"]));
    let b = report(&moment(&["--threads", "1", "identities", "--q", "5", "--seed", "3"]));
    assert_eq!(a["checks"], b["checks"]);
}

#[test]
fn short_afe_truncation_exits_3() {
    let out = moment(&["afe", "--q", "3", "--t", "30", "--mnmax", "50"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncation"));
}

#[test]
fn configuration_errors_exit_2() {
    assert_eq!(moment(&["moment", "--D", "7"]).status.code(), Some(2));
    assert_eq!(moment(&["moment", "--D", "-3", "--h", "2", "--k", "4"]).status.code(), Some(2));
    assert_eq!(moment(&["moment", "--D", "-3", "--T", "1000", "--T0", "10"]).status.code(), Some(2));
    assert_eq!(moment(&["identities", "--nonsense"]).status.code(), Some(2));
    assert_eq!(moment(&["--threads", "0", "identities"]).status.code(), Some(2));

    let bad = scratch("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(moment(&["identities", "--config", bad.to_str().unwrap()]).status.code(), Some(2));

    let table = scratch("table.json");
    std::fs::write(&table, "[0, 1, 0, 1]").unwrap();
    assert_eq!(moment(&["moment", "--q", "4", "--table", table.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn residual_failure_exits_1() {
    let out = moment(&["moment", "--D", "-3", "--h", "2", "--k", "3", "--T", "500", "--tol", "1e-12"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["checks"][0]["passed"], false);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let cfg = scratch("cfg.json");
    std::fs::write(&cfg, r#"{"q": [3], "seed": 7}"#).unwrap();
    let r = report(&moment(&["identities", "--config", cfg.to_str().unwrap(), "--seed", "9"]));
    assert_eq!(r["config"]["identities"]["q"], serde_json::json!([3]));
    assert_eq!(r["config"]["identities"]["seed"], 9);
}

#[test]
fn moment_at_desk_scale() {
    let samples = scratch("samples.csv");
    let dir = scratch("reports");
    std::fs::create_dir_all(&dir).unwrap();
    let out = moment(&[
        "--out",
        dir.to_str().unwrap(),
        "moment",
        "--D",
        "-3",
        "--h",
        "1",
        "--k",
        "1",
        "--T",
        "1000",
        "--csv",
        samples.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = std::fs::read_to_string(dir.join("moment.jsonl")).unwrap();
    let rec: Value = serde_json::from_str(lines.lines().last().unwrap()).unwrap();
    assert!(rec["check"]["residual"].as_f64().unwrap() < 0.15);
    let csv = std::fs::read_to_string(&samples).unwrap();
    assert!(csv.starts_with("t,w,"));
    assert!(csv.lines().count() > 1000);
}

#[test]
fn csv_format_lists_checks() {
    let out = moment(&["--format", "csv", "identities", "--q", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("suite,name,residual,tolerance,bound,passed\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}
