use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_typeset-lab"));
    c.env_remove("TYPESET_LAB_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn exponents_json() {
    let out = run(&["--json", "exponents", "--d", "4", "--beta", "7/10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["config"]["gamma"], "7/10");
    assert_eq!(v["q_gamma"], "44/15");
    let q2 = v["vertices"].as_array().unwrap().iter().find(|r| r["name"] == "Q2").unwrap();
    assert_eq!(q2["point"][0], "30/37");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["exponents"]).status.code(), Some(2));
    assert_eq!(run(&["region", "--d", "4", "--beta", "9/10", "--gamma", "1/2"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let ok = run(&["region", "--mode", "ls", "--d", "4", "--beta", "7/10"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let main = run(&["region", "--d", "4", "--beta", "7/10"]);
    assert_eq!(main.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&main.stderr).contains("grid_agreement"));
}

#[test]
fn failures_listed_in_json() {
    let out = run(&["--json", "member", "--d", "4", "--beta", "7/10", "--point", "1/2,1/6,1/2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["failures"], Value::Array(vec![]));
    assert_eq!(v["margin"], "1/6");
}

#[test]
fn config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"d": 3, "exponents": {"beta": "1/2"}}"#).unwrap();
    let cfg = cfg.to_str().unwrap();

    let v = json(&run(&["--json", "--config", cfg, "exponents"]));
    assert_eq!((v["config"]["d"].as_u64(), v["config"]["beta"].as_str()), (Some(3), Some("1/2")));

    let v = json(&run(&["--json", "--config", cfg, "exponents", "--beta", "3/5"]));
    assert_eq!(v["config"]["beta"], "3/5");
    assert_eq!(v["config"]["gamma"], "3/5");
}

fn render(obj: &Path, svg: &Path, view: &str) -> String {
    let out = run(&["render", "--in", obj.to_str().unwrap(), "--svg", svg.to_str().unwrap(), "--view", view]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read_to_string(svg).unwrap()
}

#[test]
fn region_mesh_then_render() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("ls.obj");
    let out = run(&["region", "--mode", "ls", "--d", "4", "--beta", "7/10", "--grid", "5", "--out", obj.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 11);
    assert!(text.contains("g T_multishell"));

    let a = render(&obj, &dir.path().join("a.svg"), "35,20");
    let b = render(&obj, &dir.path().join("b.svg"), "35,20");
    assert_eq!(a, b);
    assert!(a.starts_with("<?xml") && a.contains("<polygon"));
    assert_ne!(a, render(&obj, &dir.path().join("c.svg"), "120,-10"));
}

#[test]
fn seed_from_environment() {
    let run_seed = |seed: Option<&str>| {
        let mut c = bin();
        c.args(["--json", "experiment", "--example", "embedding", "--jmax", "6", "--draws", "8"]);
        if let Some(s) = seed {
            c.env("TYPESET_LAB_SEED", s);
        }
        json(&c.output().unwrap())
    };
    let a = run_seed(Some("7"));
    assert_eq!(a["config"]["seed"], 7);
    assert_eq!(a["rows"], run_seed(Some("7"))["rows"]);
    let flag = json(&run(&["--json", "experiment", "--example", "embedding", "--jmax", "6", "--draws", "8", "--seed", "7"]));
    assert_eq!(a["rows"], flag["rows"]);
}
