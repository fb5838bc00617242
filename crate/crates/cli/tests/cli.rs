use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fem-lab"));
    c.env_remove("FEM_LAB_OUT");
    c
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(file: &Path, out: &Path) -> Output {
    bin().arg("run").arg(file).arg("--out").arg(out).output().unwrap()
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn empty_scenario_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let file = write(tmp.path(), "empty.json", "{}");
    let out = tmp.path().join("out");
    let res = run(&file, &out);
    assert!(res.status.success());
    assert!(!out.exists());
}

#[test]
fn canonical_scenario_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&scenario("canonical.json"), &a).status.success());
    assert!(run(&scenario("canonical.json"), &b).status.success());
    assert_eq!(listing(&a), listing(&b));
    let suite = fs::read_to_string(a.join("00_suite_metric_axioms.jsonl")).unwrap();
    let lines: Vec<Value> = suite.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines.iter().any(|l| l["property"] == "pythagoras" && l["pass"] == true));
    for value in &lines {
        let again: Value = serde_json::from_str(&serde_json::to_string(value).unwrap()).unwrap();
        assert_eq!(&again, value);
    }
    let csv = fs::read_to_string(a.join("01_chain.csv")).unwrap();
    assert!(csv.contains("\n1,1,2,1,4,0.5\n") && csv.contains("\n2,3,8,1,8,0.375\n"));
}

#[test]
fn env_var_overrides_out() {
    let tmp = tempfile::tempdir().unwrap();
    let (flag, env) = (tmp.path().join("flag"), tmp.path().join("env"));
    let res = bin()
        .env("FEM_LAB_OUT", &env)
        .args(["run"])
        .arg(scenario("canonical.json"))
        .arg("--out")
        .arg(&flag)
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(env.join("summary.json").exists());
    assert!(!flag.exists());
}

#[test]
fn non_convex_potential_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenario("canonical.json")).unwrap().replace(
        r#""values": ["0", "0", "1"]"#,
        r#""values": ["0", "1", "1"]"#,
    );
    let res = run(&write(tmp.path(), "bad.json", &text), &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8(res.stderr).unwrap();
    assert!(err.contains("kink") && err.contains("chords 1 and 2"), "{err}");
}

#[test]
fn failed_assertion_exits_one_with_witness() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenario("canonical.json")).unwrap().replace(r#""1/4""#, r#""1/3""#);
    let res = run(&write(tmp.path(), "wrong.json", &text), &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8(res.stderr).unwrap();
    let json = err.trim().strip_prefix("fem-lab: assertion failed: ").unwrap();
    let witness: Value = serde_json::from_str(json).unwrap();
    assert_eq!(witness["witness"]["expected"], "1/3");
    assert_eq!(witness["witness"]["d"], "1/4");
}

#[test]
fn parse_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let res = run(&write(tmp.path(), "broken.json", "{\"experiments\": ["), &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(2));
}

fn suite(name: &str, seed: u64, count: usize) -> Output {
    bin().args(["suite", name, "--seed", &seed.to_string(), "--count", &count.to_string()]).output().unwrap()
}

#[test]
fn suite_summary_only_for_zero_trials() {
    let res = suite("metric_axioms", 1, 0);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    let v: Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(v["summary"]["count"], 0);
}

#[test]
fn measure_bounds_thousand_trials() {
    let res = suite("measure_bounds", 7, 1000);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["summary"]["trials_passed"], 1000);
    assert_eq!(text.lines().count(), 3001);
}

#[test]
fn contraction_suite_logs_lipschitz_checks() {
    let res = suite("contraction", 3, 5);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert_eq!(text.matches(r#""property":"lipschitz""#).count(), 5);
    assert_eq!(suite("contraction", 3, 5).stdout, text.into_bytes());
}

#[test]
fn unknown_suite() {
    let res = suite("nope", 1, 1);
    assert_eq!(res.status.code(), Some(2));
}
