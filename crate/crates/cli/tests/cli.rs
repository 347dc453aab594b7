use cohspace_core::reals::{parse_rational, Q};
use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn spaces(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../spaces")
        .join(name);
    root.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohspace"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut v = vec!["--json"];
    v.extend_from_slice(args);
    let o = run(&v);
    (
        o.status.code().unwrap(),
        serde_json::from_slice(&o.stdout).expect("json report"),
    )
}

#[test]
fn check_two_point_space() {
    let o = run(&["check", &spaces("f2.space")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("strict points (2): {p} {q}"));
}

#[test]
fn tensor_of_two_point_spaces_is_complete() {
    let f2 = spaces("f2.space");
    let (code, v) = json(&["complete", "--tensor", &f2, &f2]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], "cohspace-report");
    assert_eq!(v["version"], 1);
    assert_eq!(v["data"]["checks"][0]["holds"], true);
}

#[test]
fn bang_complete_and_small_sweep() {
    assert_eq!(
        run(&["complete", "--bang", &spaces("v3.space")])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(run(&["complete", "--sweep", "2"]).status.code(), Some(0));
}

#[test]
fn add_to_twenty_bits() {
    let (code, v) = json(&["realeval", "add(1/3,1/6)", "--precision", "20"]);
    assert_eq!(code, 0);
    let got = parse_rational(v["data"]["value"].as_str().unwrap()).unwrap();
    let err = got - Q::new(1.into(), 2.into());
    let tol = Q::new(1.into(), (1i64 << 20).into());
    assert!(err <= tol && -err <= tol);
}

#[test]
fn product_needs_window_or_stable_mode() {
    assert_eq!(
        run(&["realeval", "mul(sqrt(2),sqrt(2))", "--precision", "10"])
            .status
            .code(),
        Some(2)
    );
    let (code, v) = json(&[
        "realeval",
        "mul(sqrt(2),sqrt(2))",
        "--precision",
        "10",
        "--stable",
        "--profile",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["data"]["profile"][0]["queries_per_output"], 2);
    let (code, v) = json(&[
        "realeval",
        "mul(sqrt(2),sqrt(2))",
        "--precision",
        "10",
        "--window",
        "0",
        "4",
        "--profile",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["data"]["profile"][0]["queries_per_output"], 1);
}

#[test]
fn uniformity_checks_on_a_small_space() {
    let o = run(&[
        "unif",
        &spaces("v3.space"),
        "--axioms",
        "--fine",
        "--scott",
        "--bang",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("block c: {c}"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn realize_emits_trace() {
    let dir = std::env::temp_dir().join(format!("cohspace-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let tr = dir.join("half.tr");
    let o = run(&[
        "realize",
        "--fn",
        "half",
        "--depth",
        "4",
        "--validate",
        "--emit",
        tr.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(&tr).unwrap();
    assert!(!text.is_empty());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn quadratic_profile_is_two() {
    let o = run(&[
        "profile", "--fn", "sq", "--at", "1/3", "--window", "-4", "4", "--depth", "4", "--stable",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let counts: Vec<&str> = out.lines().map(|l| l.rsplit(' ').next().unwrap()).collect();
    assert_eq!(counts, vec!["2"; 5]);
}

#[test]
fn quotient_refutation_reports() {
    let o = run(&[
        "reps",
        &spaces("three.unif"),
        "--depth",
        "2",
        "--linearish",
        "--quotient",
        "all",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("level 1: consistent with level 1"));
    assert!(out.contains("level 1 without (1,{0,1}): refuted at {1}"));
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(
        run(&["check", &spaces("missing.space")]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["realize", "--fn", "sq"]).status.code(), Some(2));
    assert_eq!(run(&["complete"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = [
        "--json",
        "unif",
        &spaces("v3.space"),
        "--covers",
        "unbounded",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn trace_checks() {
    let f2 = spaces("f2.space");
    assert_eq!(
        run(&["check", &f2, "--trace", &spaces("swap.tr"), "--target", &f2])
            .status
            .code(),
        Some(0)
    );
    let o = run(&[
        "check",
        &spaces("c2.space"),
        "--trace",
        &spaces("split.tr"),
        "--target",
        &f2,
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("trace valid: FAIL"));
}
