use std::io::Write;
use std::process::Command;

use topaq::fixtures::{discrete_example, running_example};
use topaq::model::print_model;

fn model_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".ta").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_topaq")).args(args).output().unwrap();
    let s = |b: Vec<u8>| String::from_utf8(b).unwrap();
    (out.status.code().unwrap(), s(out.stdout), s(out.stderr))
}

#[test]
fn binary_exit_codes() {
    let f = model_file(&print_model(&running_example()));
    let path = f.path().to_str().unwrap();

    let (code, out, _) = run(&["check", "--mode", "exists", path]);
    assert_eq!(code, 0, "{out}");

    let (code, out, _) = run(&["check", "--mode", "full", "--obs", "first:1", path]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains('('), "{out}");

    let (code, out, _) = run(&["check", "--mode", "weak", path]);
    assert_eq!(code, 2);
    assert!(out.contains("verdict: refused"), "{out}");

    let (code, _, err) = run(&["check", "--mode", "weak", "--obs", "sometimes:3", path]);
    assert_eq!(code, 3);
    assert!(err.contains("sometimes"), "{err}");
    let (code, _, _) = run(&["check", "/nonexistent/model.ta"]);
    assert_eq!(code, 3);
}

#[test]
fn binary_discrete_and_exports() {
    let f = model_file(&print_model(&discrete_example()));
    let path = f.path().to_str().unwrap();
    let (code, out, _) = run(&["check", "--mode", "weak", path]);
    assert_eq!(code, 1, "{out}");

    let (code, out, _) = run(&["classify", path]);
    assert_eq!(code, 0);
    assert!(out.contains("discrete"), "{out}");

    let (code, out, _) = run(&["export", "--what", "region-automaton", "--format", "json", path]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v.is_object());

    let (code, out, _) = run(&["export", "--what", "ta", "--format", "dot", path]);
    assert_eq!(code, 0);
    assert!(out.starts_with("digraph"), "{out}");
}
