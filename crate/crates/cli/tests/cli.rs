use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

fn model(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name).display().to_string()
}

fn run(args: &[&str], color: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcdforge")).args(args).env("MCDFORGE_COLOR", color).output().unwrap()
}

fn mcdforge(args: &[&str]) -> Output {
    run(args, "never")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8(bytes.to_vec()).unwrap()
}

#[test]
fn check_conformant_model() {
    let o = mcdforge(&["check", &model("examens.mcd")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn check_reports_violation() {
    let o = mcdforge(&["check", &model("examens_r1.mcd")]);
    assert_eq!(o.status.code(), Some(1));
    let out = text(&o.stdout);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("R1 "), "{out}");
}

#[test]
fn check_json() {
    let o = mcdforge(&["check", &model("examens_r1.mcd"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let items = v.as_array().unwrap();
    assert_eq!(items.len(), 1);
    assert_eq!(items[0]["rule"], "R1");
    assert_eq!(items[0]["severity"], "Error");

    let o = mcdforge(&["check", &model("examens.mcd"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v, serde_json::json!([]));
}

#[test]
fn parse_error_exits_one() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.mcd");
    fs::write(&path, "model X {\n  entity A {\n").unwrap();
    let o = mcdforge(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stdout.is_empty());
}

#[test]
fn usage_and_io_errors() {
    assert_eq!(mcdforge(&["check"]).status.code(), Some(64));
    assert_eq!(mcdforge(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(mcdforge(&["emit", &model("examens.mcd"), "--dialect", "db2", "-o", "x"]).status.code(), Some(64));
    let o = mcdforge(&["check", "/nonexistent/model.mcd"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(text(&o.stderr).contains("/nonexistent/model.mcd"));
}

#[test]
fn emit_writes_only_into_target() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("out");
    for dialect in ["oracle", "embedded"] {
        let o = mcdforge(&["emit", &model("examens.mcd"), "--dialect", dialect, "-o", target.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
        assert!(o.stdout.is_empty());
        let mut names: Vec<String> =
            fs::read_dir(&target).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        names.sort();
        assert_eq!(names, ["01_tables.sql", "02_journal.sql", "03_tapis.sql", "04_triggers.sql"]);
        let head = fs::read_to_string(target.join("01_tables.sql")).unwrap();
        assert!(head.contains(&format!("-- dialect: {dialect}")), "{head}");
    }
    let entries: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);
}

#[test]
fn emit_refuses_nonconformant_model() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("out");
    let o = mcdforge(&["emit", &model("examens_r1.mcd"), "-o", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("R1"));
    assert!(!target.exists());
}

#[test]
fn transform_to_file_matches_stdout() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("examens.mld");
    let o = mcdforge(&["transform", &model("examens.mcd"), "--mode", "non-identifying", "-o", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let piped = mcdforge(&["transform", &model("examens.mcd"), "--mode", "non-identifying"]);
    assert_eq!(fs::read(&file).unwrap(), piped.stdout);
    assert!(text(&piped.stdout).contains("UID1_Exa"));
}

#[test]
fn diff_widening_and_narrowing() {
    let (v1, v2) = (model("matieres_v1.mcd"), model("matieres_v2.mcd"));
    let o = mcdforge(&["diff", "--from", &v1, "--to", &v2]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(text(&o.stdout), "PRESERVED AlterColumnType Matieres.libelle TEXT(20) -> TEXT(40)\n");

    let dir = TempDir::new().unwrap();
    let target = dir.path().join("mig");
    let o = mcdforge(&["diff", "--from", &v2, "--to", &v1, "-o", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stdout).starts_with("FORCED "));
    assert!(!target.exists());

    let o = mcdforge(&["diff", "--from", &v2, "--to", &v1, "--allow-forced", "-o", target.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(target.join("01_structure.sql").exists());
}

#[test]
fn diff_json_plan() {
    let o = mcdforge(&[
        "diff",
        "--from",
        &model("matieres_v2.mcd"),
        "--to",
        &model("matieres_v1.mcd"),
        "--allow-forced",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(
        v,
        serde_json::json!([{
            "classification": "FORCED",
            "kind": "AlterColumnType",
            "path": "Matieres.libelle",
            "detail": "TEXT(40) -> TEXT(20)",
        }])
    );
}

#[test]
fn diff_identical_is_empty() {
    let m = model("boutique.mcd");
    for mode in ["identifying", "non-identifying"] {
        let o = mcdforge(&["diff", "--from", &m, "--to", &m, "--mode", mode]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn diff_ambiguous_rename_exits_one() {
    let dir = TempDir::new().unwrap();
    let from = dir.path().join("a.mcd");
    let to = dir.path().join("b.mcd");
    let body = |attr: &str| {
        format!("model M {{\n  entity Ville {{\n    code: word «UID-1» «M»\n    {attr}: string(10)\n  }}\n}}\n")
    };
    fs::write(&from, body("nom")).unwrap();
    fs::write(&to, body("libelle")).unwrap();
    let o = mcdforge(&["diff", "--from", from.to_str().unwrap(), "--to", to.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("nom"));
}

#[test]
fn color_control() {
    let args = ["check", &model("examens_r1.mcd")];
    assert!(text(&run(&args, "always").stdout).contains("\x1b["));
    assert!(!text(&run(&args, "never").stdout).contains("\x1b["));
    assert!(!text(&run(&args, "auto").stdout).contains("\x1b["));
}
