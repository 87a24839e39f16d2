use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

fn natgrad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_natgrad"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn problem(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "problems", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn catalog_lists_every_entry() {
    let out = natgrad(&["catalog"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let ids: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids.len(), 13);
    assert!(ids.contains(&"i") && ids.contains(&"ix") && ids.contains(&"power-g"));
}

#[test]
fn catalog_instantiates_and_rejects_constraint_violations() {
    let out = natgrad(&["catalog", "--id", "iii", "--param", "C=1.5"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["g"]["C"], 1.5);

    let out = natgrad(&["catalog", "--id", "i", "--param", "C2=4"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("C2"));
}

#[test]
fn check_exit_codes_follow_verdicts() {
    let out = natgrad(&["check", &problem("i.json")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 4);

    assert_eq!(
        code(&natgrad(&["check", &problem("vi.json"), "--condition", "H_AR1"])),
        2
    );

    let dir = TempDir::new().unwrap();
    let doc = natgrad(&["catalog", "--id", "ii"]);
    let path = write(&dir, "ii.json", &String::from_utf8_lossy(&doc.stdout));
    assert_eq!(
        code(&natgrad(&["check", &path, "--condition", "regime_ar_sufficient"])),
        3
    );
}

#[test]
fn malformed_documents_report_position() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "bad.json", "{\n  \"p\": 2,\n  \"f\": }\n");
    let out = natgrad(&["check", &path]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert_eq!(code(&natgrad(&["check", "/definitely/not/here.json"])), 1);
    assert_eq!(code(&natgrad(&["no-such-command"])), 1);
}

#[test]
fn solve_without_reaction_does_not_converge() {
    assert_eq!(code(&natgrad(&["solve", &problem("zero.json")])), 4);
}

#[test]
fn solve_writes_certified_solution_deterministically() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let csv = dir.path().join(name);
        let out = natgrad(&["solve", &problem("i.json"), "--out", csv.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        (std::fs::read(csv).unwrap(), out.stdout)
    };
    let (csv, summary) = run("a.csv");
    let s: serde_json::Value = serde_json::from_slice(&summary).unwrap();
    assert!(s["residual"].as_f64().unwrap() <= 1e-5);
    assert!(String::from_utf8_lossy(&csv).starts_with("x,u,v\n"));
    assert_eq!(run("b.csv"), (csv, summary));
}

#[test]
fn eigen_on_unit_interval() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "lin.json", r#"{"p": 2, "f": {"kind": "zero"}, "nodes": 401}"#);
    let csv = dir.path().join("phi.csv");
    let out = natgrad(&["eigen", &path, "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let s: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let l = s["lambda1"].as_f64().unwrap();
    assert!((l - std::f64::consts::PI.powi(2)).abs() < 1e-3 * l);
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 402);
}

#[test]
fn transform_matches_exponential() {
    let dir = TempDir::new().unwrap();
    let path = write(
        &dir,
        "exp.json",
        r#"{"p": 2, "g": {"kind": "constant", "C": 1}, "f": {"kind": "zero"}}"#,
    );
    let out = natgrad(&["transform", &path, "--s-max", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(last[0], 1.0);
    assert!((last[2] - (1f64.exp() - 1.0)).abs() < 1e-10);
}

#[test]
fn bifurcate_traces_two_branches_reproducibly() {
    let args = [
        "bifurcate",
        &problem("ix.json"),
        "--nodes",
        "101",
        "--lambda-min",
        "1",
        "--lambda-max",
        "8",
        "--lambda-steps",
        "5",
        "--seed",
        "7",
    ];
    let a = natgrad(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let text = String::from_utf8_lossy(&a.stdout);
    assert!(text.starts_with("lambda,branch,sup_norm,energy\n"));
    assert!(text.contains(",minimal,") && text.contains(",mountain_pass,"));
    assert_eq!(natgrad(&args).stdout, a.stdout);
}
