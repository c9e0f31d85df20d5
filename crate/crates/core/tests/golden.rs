//! Byte-exact comparison with checked-in outputs. Run with
//! `UPDATE_GOLDEN=1` to rewrite them.

mod common;

use std::fs;
use std::path::PathBuf;

use common::{corpus, physical, MODES};
use mcdforge::sql::{emit_ddl, strip_hash, DialectId};
use mcdforge::text::{logical_to_string, physical_to_string};
use mcdforge::transform::transform;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn compare(rel: &str, actual: &str, failures: &mut Vec<String>) {
    let path = golden_dir().join(rel);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    match fs::read_to_string(&path) {
        Ok(expected) if expected == actual => {}
        Ok(_) => failures.push(format!("{rel} differs")),
        Err(e) => failures.push(format!("{rel}: {e}")),
    }
}

#[test]
fn corpus_outputs_match_golden_files() {
    let mut failures = Vec::new();
    for (file, model) in corpus() {
        let stem = file.trim_end_matches(".mcd");
        for mode in MODES {
            let lm = transform(&model, mode).unwrap();
            compare(&format!("{stem}/{mode}.mld"), &logical_to_string(&lm), &mut failures);
            let pm = physical(&model, mode);
            compare(&format!("{stem}/{mode}.mpd"), &physical_to_string(&pm), &mut failures);
            for dialect in [DialectId::Oracle, DialectId::Embedded] {
                for s in emit_ddl(&pm, dialect).unwrap().scripts {
                    compare(&format!("{stem}/{mode}/{dialect}/{}", s.name), &strip_hash(&s.content), &mut failures);
                }
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}
