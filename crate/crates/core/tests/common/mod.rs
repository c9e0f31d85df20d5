#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use mcdforge::model::{ConceptualModel, PhysicalModel};
use mcdforge::parser::parse;
use mcdforge::sql::{emit_ddl, DialectId};
use mcdforge::tapi::build_physical;
use mcdforge::transform::{transform, TransformMode};
use rusqlite::Connection;

pub const MODES: [TransformMode; 2] = [TransformMode::Identifying, TransformMode::NonIdentifying];

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn corpus_source(name: &str) -> String {
    fs::read_to_string(models_dir().join(name)).unwrap()
}

/// Every conformant corpus model, by file name.
pub fn corpus() -> Vec<(String, ConceptualModel)> {
    let mut names: Vec<String> = fs::read_dir(models_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".mcd"))
        .collect();
    names.sort();
    names
        .into_iter()
        .filter_map(|n| {
            let m = parse(&corpus_source(&n)).unwrap();
            mcdforge::conformance::check(&m).is_empty().then_some((n, m))
        })
        .collect()
}

pub fn physical(model: &ConceptualModel, mode: TransformMode) -> PhysicalModel {
    let logical = transform(model, mode).unwrap();
    build_physical(&logical, model).unwrap()
}

pub fn deploy(pm: &PhysicalModel) -> Connection {
    let conn = Connection::open_in_memory().unwrap();
    conn.execute_batch(&emit_ddl(pm, DialectId::Embedded).unwrap().concat()).unwrap();
    conn
}

fn names(conn: &Connection, sql: &str) -> Vec<String> {
    let mut stmt = conn.prepare(sql).unwrap();
    stmt.query_map([], |r| r.get(0)).unwrap().collect::<Result<_, _>>().unwrap()
}

fn strings(conn: &Connection, sql: &str) -> Vec<String> {
    let mut stmt = conn.prepare(sql).unwrap();
    let n = stmt.column_count();
    stmt.query_map([], |r| {
        (0..n)
            .map(|i| r.get::<_, rusqlite::types::Value>(i).map(|v| format!("{v:?}")))
            .collect::<Result<Vec<_>, _>>()
            .map(|v| v.join("|"))
    })
    .unwrap()
    .collect::<Result<_, _>>()
    .unwrap()
}

/// Schema as reported by the engine: columns, keys, unique indexes,
/// foreign keys and trigger text, independent of creation history.
pub fn introspect(conn: &Connection) -> String {
    let mut out = String::new();
    let tables =
        names(conn, "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY name");
    for t in tables {
        out.push_str(&format!("table {t}\n"));
        for c in strings(conn, &format!("SELECT name, type, \"notnull\", dflt_value, pk FROM pragma_table_info('{t}')"))
        {
            out.push_str(&format!("  column {c}\n"));
        }
        let mut uniques = Vec::new();
        for name in names(conn, &format!("SELECT name FROM pragma_index_list('{t}')")) {
            let kind = strings(
                conn,
                &format!("SELECT \"unique\", origin FROM pragma_index_list('{t}') WHERE name = '{name}'"),
            );
            let cols = names(conn, &format!("SELECT name FROM pragma_index_info('{name}') ORDER BY seqno"));
            uniques.push(format!("  index {} ({})", kind[0], cols.join(", ")));
        }
        uniques.sort();
        for u in uniques {
            out.push_str(&u);
            out.push('\n');
        }
        let mut fks = strings(
            conn,
            &format!("SELECT id, seq, \"table\", \"from\", \"to\", on_delete FROM pragma_foreign_key_list('{t}') ORDER BY id, seq"),
        )
        .into_iter()
        .map(|f| f.split_once('|').unwrap().1.to_string())
        .collect::<Vec<_>>();
        fks.sort();
        for f in fks {
            out.push_str(&format!("  fk {f}\n"));
        }
    }
    for t in strings(conn, "SELECT tbl_name, name, sql FROM sqlite_master WHERE type = 'trigger' ORDER BY name") {
        out.push_str(&format!("trigger {t}\n"));
    }
    out
}

/// Sorted rows of every table over the given columns.
pub fn rows(conn: &Connection, table: &str, columns: &[String]) -> Vec<String> {
    if columns.is_empty() {
        return Vec::new();
    }
    let mut r = strings(conn, &format!("SELECT {} FROM {table}", columns.join(", ")));
    r.sort();
    r
}
