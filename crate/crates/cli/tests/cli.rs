//! End-to-end tests of the `probcirc` binary: report formats and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn programs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/programs")
}

fn derivations() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/derivations")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_probcirc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn prog(name: &str) -> String {
    programs().join(name).to_string_lossy().into_owned()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn temp_file(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("probcirc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn infer_urn() {
    let out = run(&["infer", &prog("urn.prog")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        r#"{"class":"canonical","dist":{"1":[2,3],"0":[1,3]}}"#
    );
}

#[test]
fn infer_contradiction_is_bottom() {
    let out = run(&["infer", &prog("contradiction.prog")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out), json!({"class": "bottom"}));
}

#[test]
fn equiv_von_neumann_and_fair_coin() {
    let out = run(&["equiv", &prog("vonneumann.prog"), &prog("fair.prog")]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["equivalent"], json!(true));
    assert_eq!(v["left"], v["right"]);
    let forms = v["normal_forms"].as_array().expect("closed programs have normal forms");
    assert_eq!(forms[0], forms[1]);
}

#[test]
fn equiv_distinguishes_normalization_contexts() {
    let out = run(&["equiv", &prog("context_f.prog"), &prog("context_g.prog")]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["equivalent"], json!(false));
    assert_eq!(v["left"]["dist"]["1"], json!([2, 11]));
    assert_eq!(v["right"]["dist"]["1"], json!([1, 10]));
}

#[test]
fn equiv_program_against_circuit() {
    let out = run(&["equiv", &prog("frobenius.prog"), &prog("identity.circ")]);
    assert_eq!(out.status.code(), Some(0));
    // Open conditioned circuits have no normal form.
    assert_eq!(stdout_json(&out)["normal_forms"], Value::Null);
}

#[test]
fn equiv_type_mismatch_is_an_input_error() {
    let two = temp_file("two.circ", "copy");
    let out = run(&["equiv", &prog("identity.circ"), &two]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn compile_reports_type() {
    let out = run(&["compile", &prog("frobenius.prog")]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["type"], json!("1->1"));
    // The emitted text is itself a valid input.
    let back = temp_file("frob.circ", v["circuit"].as_str().unwrap());
    let again = run(&["infer", &back]);
    assert_eq!(again.stdout, run(&["infer", &prog("frobenius.prog")]).stdout);
}

#[test]
fn normalize_and_eliminate() {
    let out = run(&["normalize", &prog("fair.prog")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["type"], json!("0->1"));

    // Normal forms are only defined for causal circuits.
    assert_eq!(run(&["normalize", &prog("urn.prog")]).status.code(), Some(1));

    let out = run(&["eliminate", &prog("urn.prog")]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["failure"], json!(false));
    assert!(!v["circuit"].as_str().unwrap().contains("cond"));

    let out = run(&["eliminate", &prog("contradiction.prog")]);
    assert_eq!(stdout_json(&out)["failure"], json!(true));
}

#[test]
fn derive_check_accepts_shipped_files() {
    for name in ["vonneumann.json", "derived_e5.json"] {
        let path = derivations().join(name);
        let out = run(&["derive-check", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert_eq!(stdout_json(&out)["ok"], json!(true));
    }
}

#[test]
fn derive_check_reports_failing_step() {
    let text = std::fs::read_to_string(derivations().join("vonneumann.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["steps"][3]["path"] = json!([0]);
    let bad = temp_file("bad.json", &v.to_string());
    let out = run(&["derive-check", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["step"], json!(3));
}

#[test]
fn axioms_check_is_deterministic() {
    let a = run(&["axioms-check", "--trials", "3", "--seed", "7"]);
    let b = run(&["axioms-check", "--trials", "3", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = stdout_json(&a);
    assert_eq!(v["ok"], json!(true));
    assert_eq!(v["rules"].as_array().unwrap().len(), 44);

    let human = run(&["axioms-check", "--trials", "2", "--human"]);
    let text = String::from_utf8_lossy(&human.stdout);
    assert!(text.contains("E2") && text.contains("proportional"));
}

#[test]
fn error_exit_codes() {
    assert_eq!(run(&["infer", "/definitely/not/here"]).status.code(), Some(2));
    let bad = temp_file("bad.prog", "let x = in x");
    let out = run(&["infer", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("syntax error"));
    let ill_typed = temp_file("ill.prog", "fst true");
    assert_eq!(run(&["infer", &ill_typed]).status.code(), Some(2));
    let out = run(&["--cap", "2", "infer", &prog("urn.prog")]);
    assert_eq!(out.status.code(), Some(3));
}
