use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn rep(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/reps")
        .join(format!("{name}.rep"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foldgrowth"))
        .args(args)
        .env_remove("FOLDGROWTH_MAX_SHEETS")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn degrees_of_e1() {
    let out = run(&["degrees", rep("e1").to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["eta"], 2);
    assert_eq!(v["degrees"]["e3"], 2);
    assert_eq!(v["breakpoints"], serde_json::json!([2, 3, 4]));
}

#[test]
fn iterate_e3_twice() {
    let out = run(&[
        "iterate",
        rep("e1").to_str().unwrap(),
        "--path",
        "e3",
        "--k",
        "2",
        "--format",
        "table",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "e3 e1 e2 e1 e2 e1\n");
    let out = run(&[
        "iterate",
        rep("e1").to_str().unwrap(),
        "--path",
        "e3",
        "--k",
        "2",
    ]);
    assert_eq!(json(&out)["image"], "e3 e1 e2 e1 e2 e1");
}

#[test]
fn iterate_inverse() {
    let out = run(&[
        "iterate",
        rep("e1").to_str().unwrap(),
        "--path",
        "e3",
        "--reverse",
        "--format",
        "table",
    ]);
    assert_eq!(stdout(&out), "e3 e1 ~e2 ~e1\n");
}

#[test]
fn validate_reports_filtration_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.rep");
    std::fs::write(
        &bad,
        "rep bad\nedge e1 : v0 -> v0\nedge e2 : v0 -> v0\nmap e1 -> e1 e2\nmap e2 -> e2\n",
    )
    .unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["valid"], false);
    assert!(v["error"].as_str().unwrap().contains("filtration error"));
}

#[test]
fn parse_errors_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.rep");
    std::fs::write(&bad, "rep bad\nedge e1 : v0 -> v9\n").unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["error"]
        .as_str()
        .unwrap()
        .contains("line 2, column"));
}

#[test]
fn validate_suite_rep() {
    let out = run(&[
        "validate",
        rep("theta3").to_str().unwrap(),
        "--format",
        "table",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("valid       true"));
}

#[test]
fn separate_prints_tokens_and_units() {
    let out = run(&[
        "separate",
        rep("twist2").to_str().unwrap(),
        "--path",
        "b a ~b",
        "--format",
        "table",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "FE(a=b,b=b,d=1,len=3)\nb a ~b\n");
    let out = run(&["separate", rep("twist2").to_str().unwrap(), "--path", "b b"]);
    let v = json(&out);
    assert_eq!(
        v["units"],
        serde_json::json!(["LF(a=b,d=0,len=1)", "LF(a=b,d=0,len=1)"])
    );
    assert_eq!(v["separation"], "b ◇ b");
}

#[test]
fn split_annotates_degrees() {
    let out = run(&[
        "split",
        rep("e1").to_str().unwrap(),
        "--path",
        "e3 e2 e3",
        "--format",
        "table",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(stdout(&out), "e3 e2 [2] * e3 [2]\n");
}

#[test]
fn fold_and_cover() {
    let out = run(&[
        "fold",
        rep("e1").to_str().unwrap(),
        "--path",
        "e1 e1",
        "--path",
        "e2",
    ]);
    let v = json(&out);
    assert_eq!(
        (
            v["vertices"].as_u64(),
            v["rank"].as_i64(),
            v["immersion"].as_bool()
        ),
        (Some(2), Some(2), Some(true))
    );
    let out = run(&[
        "cover",
        rep("e2").to_str().unwrap(),
        "--path",
        "a a",
        "--path",
        "b",
        "--path",
        "c",
    ]);
    let v = json(&out);
    assert_eq!(v["sheets"], 2);
    assert_eq!(v["cover"], true);
    assert_eq!(v["rank"], 5);
}

#[test]
fn cover_respects_sheet_bound() {
    let out = run(&[
        "cover",
        rep("e2").to_str().unwrap(),
        "--path",
        "a a a",
        "--max-sheets",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_closed_paths_are_rejected() {
    let out = run(&["fold", rep("bigon2").to_str().unwrap(), "--path", "a"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_e2_writes_matching_dot() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "verify",
        rep("e2").to_str().unwrap(),
        "--dot",
        dir.path().to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["eta"], 2);
    assert_eq!(v["homology_degree"], 2);
    assert!(v["sheets"].as_u64().unwrap() <= 24);
    assert!(!v["samples"].as_array().unwrap().is_empty());
    let sigma = std::fs::read_to_string(dir.path().join("sigma.dot")).unwrap();
    assert_eq!(
        sigma.matches("shape=").count() as u64,
        v["sigma"]["vertices"].as_u64().unwrap()
    );
    assert_eq!(
        sigma.matches(" -> ").count() as u64,
        v["sigma"]["edges"].as_u64().unwrap()
    );
    let cover = std::fs::read_to_string(dir.path().join("cover.dot")).unwrap();
    assert_eq!(
        cover.matches(" -> ").count() as u64,
        v["pipeline"]["edges"].as_u64().unwrap()
    );
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let one = run(&[
        "apt",
        rep("e1").to_str().unwrap(),
        "--dot",
        a.path().to_str().unwrap(),
    ]);
    let two = run(&[
        "apt",
        rep("e1").to_str().unwrap(),
        "--dot",
        b.path().to_str().unwrap(),
    ]);
    let strip = |o: &Output| {
        let mut v = json(o);
        v["dot"] = Value::Null;
        v
    };
    assert_eq!(strip(&one), strip(&two));
    assert_eq!(
        std::fs::read(a.path().join("sigma.dot")).unwrap(),
        std::fs::read(b.path().join("sigma.dot")).unwrap()
    );
}

#[test]
fn verify_reports_resource_exhaustion() {
    let out = Command::new(env!("CARGO_BIN_EXE_foldgrowth"))
        .args([
            "verify",
            rep("e2").to_str().unwrap(),
            "--no-confirm",
            "--search-bound",
            "2",
        ])
        .env("FOLDGROWTH_MAX_SHEETS", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["holds"], false);
}

#[test]
fn bounded_growth_verifies_on_the_base() {
    let out = run(&["verify", rep("fixed_rose2").to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(
        (v["eta"].as_u64(), v["route"].as_str(), v["sheets"].as_u64()),
        (Some(0), Some("base"), Some(1))
    );
}
