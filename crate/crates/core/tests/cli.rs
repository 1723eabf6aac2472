use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_deco-state"))
        .args(args)
        .current_dir(root())
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let (code, out, err) = run(&all);
    let v: Value = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}{err}"));
    for key in ["command", "status", "details", "elapsed_ms"] {
        assert!(v.get(key).is_some(), "missing {key} in {v}");
    }
    assert_eq!(v["status"] == "ok", code == 0, "{v}");
    (code, v)
}

fn scratch(name: &str, body: &str) -> String {
    let dir = std::env::temp_dir().join(format!("deco-state-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn check_proof_accepts_commutation() {
    let (code, v) = json(&["check-proof", "corpus/commutation.proof"]);
    assert_eq!(code, 0);
    assert_eq!(v["command"], "check-proof");
    assert_eq!(v["details"]["verdict"]["top_rule"], "CompFinalUnique");
    assert_eq!(v["details"]["verdict"]["labels"].as_array().unwrap().len(), 11);
}

#[test]
fn check_proof_rejection_names_a_path() {
    let (code, v) = json(&["check-proof", "corpus/strong_axiom_1_upgrade.proof"]);
    assert_eq!(code, 1);
    let verdict = &v["details"]["verdict"];
    assert_eq!(verdict["reason"], "SideConditionViolated");
    assert!(verdict["failing_path"].as_str().unwrap().starts_with("root"));
}

#[test]
fn validate_reports_counterexample() {
    let (code, v) = json(&["validate", "corpus/strong_axiom_1.eq"]);
    assert_eq!(code, 1);
    let c = &v["details"]["counterexample"];
    for key in ["input", "store", "lhs", "rhs"] {
        assert!(c.get(key).is_some(), "{key}");
    }
    assert_ne!(c["lhs"]["store"], c["rhs"]["store"]);
}

#[test]
fn validate_holds() {
    let (code, v) = json(&["validate", "corpus/eq1.eq"]);
    assert_eq!(code, 0);
    assert_eq!(v["details"]["holds"], true);
}

#[test]
fn check_kind_text_and_json() {
    let f = scratch("k.term", "lookup j o update i\n");
    let (code, out, _) = run(&["check-kind", &f]);
    assert_eq!(code, 0);
    assert!(out.contains("rw"), "{out}");
    let (_, v) = json(&["check-kind", &f]);
    assert_eq!(v["details"]["kind"], "rw");
}

#[test]
fn type_mismatch_exits_one_with_position() {
    let f = scratch("bad.term", "pi1 o final\n");
    let (code, out, err) = run(&["check-kind", &f]);
    assert_eq!(code, 1);
    assert!(format!("{out}{err}").contains("1:5"));
}

#[test]
fn syntax_errors_exit_two() {
    let f = scratch("broken.term", "id o (\n");
    assert_eq!(run(&["check-kind", &f]).0, 2);
    assert_eq!(run(&["check-kind", "no/such/file.term"]).0, 2);
    assert_eq!(run(&["bogus"]).0, 2);
    assert_eq!(run(&["check-kind", "corpus/eq1.eq"]).0, 2);
}

#[test]
fn replay_corpus_directory() {
    let (code, v) = json(&["replay", "corpus"]);
    assert_eq!(code, 0);
    let scripts = v["details"]["scripts"].as_array().unwrap();
    assert_eq!(scripts.len(), 10);
    assert!(scripts.iter().all(|s| s["ok"] == true));
}

#[test]
fn small_sweep() {
    let (code, v) = json(&["--seed", "7", "sweep", "--count", "20"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["details"]["rules"].as_array().unwrap().len(), 22);
}
