use std::fs;
use std::path::Path;
use std::process::Command as Process;

use hypglue::cli::{default_data_dir, run, Command, Inputs, Options, Stage, DIAGRAM_FILE, GLUING_FILE};
use serde_json::Value;

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_hypglue"))
}

fn copy_data(to: &Path) {
    for entry in fs::read_dir(default_data_dir()).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), to.join(entry.file_name())).unwrap();
    }
}

#[test]
fn certificates_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let status = bin().args(["verify-q", "--json"]).arg(out).output().unwrap();
        assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stdout));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let v: Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    assert_eq!(v["pass"], Value::Bool(true));
    assert_eq!(v["stages"]["q-euler"]["values"]["orbifold_euler"], "1/60");
}

#[test]
fn library_runs_are_deterministic() {
    let inputs = Inputs::load(&default_data_dir()).unwrap();
    let x = run(Command::BuildP, &inputs, &Options::default()).to_json();
    let y = run(Command::BuildP, &inputs, &Options::default()).to_json();
    assert_eq!(x, y);
}

#[test]
fn edited_diagram_fails_and_names_the_edge() {
    let dir = tempfile::tempdir().unwrap();
    copy_data(dir.path());
    let path = dir.path().join(DIAGRAM_FILE);
    let text = fs::read_to_string(&path).unwrap();
    let edited: String = text
        .lines()
        .filter(|l| !(l.starts_with("edge") && l.contains("i0") && l.contains("i1")))
        .map(|l| format!("{l}\n"))
        .collect();
    assert_ne!(edited, text);
    fs::write(&path, edited).unwrap();
    let json = dir.path().join("cert.json");
    let out = bin().arg("verify-q").arg("--data-dir").arg(dir.path()).arg("--json").arg(&json).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL q-diagram"), "{stdout}");
    assert!(stdout.contains("PASS q-euler") || stdout.contains("FAIL q-euler"));
    let v: Value = serde_json::from_slice(&fs::read(&json).unwrap()).unwrap();
    let diffs = v["stages"]["q-diagram"]["values"]["diagram_differences"].to_string();
    assert!(diffs.contains("i0") && diffs.contains("i1"), "{diffs}");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    copy_data(dir.path());
    fs::remove_file(dir.path().join(GLUING_FILE)).unwrap();
    let out = bin().arg("build-x").arg("--data-dir").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    fs::write(dir.path().join(GLUING_FILE), "pair 0:E1 1:X9 id\n").unwrap();
    let out = bin().arg("build-x").arg("--data-dir").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_pair_word_is_reported() {
    let inputs = Inputs::load(&default_data_dir()).unwrap();
    let options = Options {
        pair: Some(("a*r12".into(), "q".into())),
    };
    let cert = run(Command::BuildM, &inputs, &options);
    let m = cert.stage(Stage::MBuild).unwrap();
    assert!(!m.pass);
    assert!(m.notes.iter().any(|n| n.contains('q')), "{:?}", m.notes);
}

#[test]
fn variants_table() {
    let inputs = Inputs::load(&default_data_dir()).unwrap();
    let cert = run(Command::Variants, &inputs, &Options::default());
    let v = cert.stage(Stage::Variants).unwrap();
    let table = v.values["table"].as_array().unwrap();
    assert_eq!(table.len(), 6);
    for row in table {
        assert_eq!(row["h_free"], Value::Bool(true));
        assert_eq!(row["c_free"], Value::Bool(true));
    }
    assert_eq!(v.values["orientable_count"], 1);
}
