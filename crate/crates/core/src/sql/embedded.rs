use std::fmt::Write;

use super::{error_for, error_payload, quote, EmitError};
use crate::model::physical::PEA_MANDATORY_MESSAGE_TEXT;
use crate::model::{
    BaseType, Column, ColumnOrigin, DeleteRule, InitExpr, NeutralType, PhysicalModel, ProcedureKind, ProcedureSpec,
    Refinement, Table, TableApi, TriggerEvent,
};
use crate::tapi::{autogenerated, uppercased, JN_DATETIME, JN_OPERATION, JN_USER};

pub const SESSION_TABLE: &str = "TAPI_SESSION";
const TIMESTAMP_NOW: &str = "strftime('%Y-%m-%dT%H:%M:%f', 'now')";
const FIXUP_KEY: &str = "fixup";

pub(crate) fn type_name(t: NeutralType) -> String {
    match t {
        NeutralType::Text(n) => format!("TEXT({n})"),
        NeutralType::Integer | NeutralType::Boolean | NeutralType::Interval => "INTEGER".into(),
        NeutralType::Numeric(p, s) => format!("NUMERIC({p},{s})"),
        NeutralType::Date | NeutralType::Timestamp => "TEXT".into(),
    }
}

fn now_expr(c: &Column) -> &'static str {
    if c.logical_type.base == BaseType::Date {
        "date('now')"
    } else {
        TIMESTAMP_NOW
    }
}

fn user_expr() -> String {
    format!("COALESCE((SELECT value FROM {SESSION_TABLE} WHERE key = 'user'), 'unknown')")
}

/// A NOT NULL column with `init=now()` replaces an incoming null by its
/// default; a nullable one gets it from the AFTER trigger fix-up.
pub(crate) fn column_def(c: &Column) -> String {
    let mut out = format!("{} {}", c.name, type_name(c.sql_type));
    if c.origin == ColumnOrigin::Surrogate {
        return out;
    }
    match (c.init, c.nullable) {
        (Some(InitExpr::Now), false) => write!(out, " NOT NULL ON CONFLICT REPLACE DEFAULT ({})", now_expr(c)).unwrap(),
        (Some(InitExpr::Now), true) => write!(out, " DEFAULT ({})", now_expr(c)).unwrap(),
        (None, false) => out.push_str(" NOT NULL"),
        (None, true) => {}
    }
    out
}

pub(crate) fn create_table(t: &Table, name: &str) -> String {
    let mut lines: Vec<String> = t.columns.iter().map(|c| format!("  {}", column_def(c))).collect();
    if !t.primary_key.is_empty() {
        lines.push(format!("  CONSTRAINT {} PRIMARY KEY ({})", t.primary_key_name(), t.primary_key.join(", ")));
    }
    for u in &t.uniques {
        lines.push(format!("  CONSTRAINT {} UNIQUE ({})", u.name, u.columns.join(", ")));
    }
    for fk in &t.foreign_keys {
        lines.push(format!(
            "  CONSTRAINT {} FOREIGN KEY ({}) REFERENCES {} ({}) ON DELETE {}",
            fk.name,
            fk.columns.join(", "),
            fk.referenced_table,
            fk.referenced_columns.join(", "),
            match fk.on_delete {
                DeleteRule::Cascade => "CASCADE",
                DeleteRule::Restrict => "RESTRICT",
            }
        ));
    }
    format!("CREATE TABLE IF NOT EXISTS {name} (\n{}\n);\n", lines.join(",\n"))
}

pub(crate) fn session_table() -> String {
    format!("CREATE TABLE IF NOT EXISTS {SESSION_TABLE} (\n  key TEXT PRIMARY KEY,\n  value TEXT\n);\n")
}

pub(crate) fn emit(pm: &PhysicalModel) -> Result<[String; 4], EmitError> {
    let mut tables = String::new();
    if !pm.logical.tables.is_empty() {
        tables.push_str("\nPRAGMA foreign_keys = ON;\n");
    }
    for t in &pm.logical.tables {
        tables.push('\n');
        tables.push_str(&create_table(t, &t.name));
    }
    let mut journal = String::new();
    for t in &pm.journal_tables {
        journal.push('\n');
        journal.push_str(&create_table(t, &t.name));
    }
    let mut tapis = String::new();
    if !pm.table_apis.is_empty() {
        tapis.push('\n');
        tapis.push_str(&session_table());
    }
    let mut triggers = String::new();
    for api in &pm.table_apis {
        let table = pm.logical.table(&api.table_name).expect("table API of a known table");
        triggers.push_str(&table_triggers(api, table, pm.journal_table(&table.name)));
    }
    Ok([tables, journal, tapis, triggers])
}

fn raise(code: i32, payload: &str) -> String {
    format!("RAISE(ABORT, {})", quote(&format!("{code} {payload}")))
}

fn check(code: i32, payload: &str, cond: &str) -> String {
    format!("  SELECT {} WHERE {cond};\n", raise(code, payload))
}

pub(crate) fn frozen_guard(table: &str, spec: &ProcedureSpec) -> String {
    frozen_guard_with(table, spec, &|_| false)
}

/// Uppercased columns are compared after normalization, as the oracle
/// chain runs uppercase_column before frozen_column.
fn frozen_guard_with(table: &str, spec: &ProcedureSpec, upper: &dyn Fn(&str) -> bool) -> String {
    let Some(err) = &spec.error else {
        return String::new();
    };
    spec.target_columns
        .iter()
        .map(|name| {
            let new = if upper(name) { format!("upper(NEW.{name})") } else { format!("NEW.{name}") };
            check(
                err.code,
                &error_for(table, name, err),
                &format!("{new} IS NOT OLD.{name} AND OLD.{name} IS NOT NULL"),
            )
        })
        .collect()
}

fn control_chars(v: &str) -> String {
    format!("instr({v}, char(9)) > 0 OR instr({v}, char(10)) > 0 OR instr({v}, char(13)) > 0")
}

fn checktype(table: &Table, spec: &ProcedureSpec) -> String {
    let err = spec.error.as_ref().expect("checktype error");
    let mut out = String::new();
    for name in &spec.target_columns {
        let c = table.column(name).expect("target column");
        let v = format!("NEW.{name}");
        let cond = match c.logical_type.base.refinement() {
            Some(Refinement::Word) => format!("instr({v}, ' ') > 0 OR {}", control_chars(&v)),
            Some(Refinement::Token) => {
                format!("{v} <> trim({v}, ' ') OR instr({v}, '  ') > 0 OR {}", control_chars(&v))
            }
            None => continue,
        };
        out.push_str(&check(err.code, &error_for(&table.name, name, err), &cond));
    }
    out
}

fn pea(table: &Table, spec: &ProcedureSpec) -> String {
    let err = spec.error.as_ref().expect("PEA error");
    let mut out = String::new();
    for name in &spec.target_columns {
        let c = table.column(name).expect("target column");
        let fk =
            table.foreign_key(c.pea_fk_group.as_deref().unwrap_or_default()).expect("PEA group names a foreign key");
        let unlinked: Vec<String> = fk.columns.iter().map(|f| format!("NEW.{f} IS NULL")).collect();
        out.push_str(&check(
            err.code,
            &error_for(&table.name, name, err),
            &format!("{} AND NEW.{name} IS NOT NULL", unlinked.join(" AND ")),
        ));
        if c.mandatory_when_linked {
            let linked: Vec<String> = fk.columns.iter().map(|f| format!("NEW.{f} IS NOT NULL")).collect();
            out.push_str(&check(
                err.code,
                &error_payload(&table.name, name, &err.key, PEA_MANDATORY_MESSAGE_TEXT),
                &format!("{} AND NEW.{name} IS NULL", linked.join(" AND ")),
            ));
        }
    }
    out
}

fn journal_insert(jn: &Table, cols: &[String], source: &str) -> String {
    format!(
        "  INSERT INTO {} ({JN_OPERATION}, {JN_USER}, {JN_DATETIME}, {})\n    {source};\n",
        jn.name,
        cols.join(", "),
    )
}

/// Names of every trigger the embedded rendering creates for a table API.
pub(crate) fn trigger_names(api: &TableApi) -> Vec<String> {
    let mut names: Vec<String> = api.triggers.iter().map(|t| t.name.clone()).collect();
    names.push(format!("{}_TAPIs_AIR", api.abbrev));
    names.push(format!("{}_TAPIs_AUR", api.abbrev));
    names
}

pub(crate) fn drop_triggers(api: &TableApi) -> String {
    trigger_names(api).iter().map(|n| format!("DROP TRIGGER IF EXISTS {n};\n")).collect()
}

fn fixups(table: &Table, api: &TableApi) -> Vec<String> {
    let mut sets = Vec::new();
    for c in &table.columns {
        let mut value = c.name.clone();
        if api.has(ProcedureKind::UppercaseColumn) && uppercased(c) {
            value = format!("upper({value})");
        }
        if api.has(ProcedureKind::AutogenColumn)
            && autogenerated(c)
            && c.nullable
            && c.origin != ColumnOrigin::Surrogate
        {
            value = format!("COALESCE({value}, {})", now_expr(c));
        }
        if value != c.name {
            sets.push(format!("{} = {value}", c.name));
        }
    }
    sets
}

pub(crate) fn table_triggers(api: &TableApi, table: &Table, journal: Option<&Table>) -> String {
    let no_fixup = format!("NOT EXISTS (SELECT 1 FROM {SESSION_TABLE} WHERE key = '{FIXUP_KEY}')");
    let upper = |name: &str| api.has(ProcedureKind::UppercaseColumn) && table.column(name).is_some_and(uppercased);
    let mut out = String::from("\n");
    out.push_str(&drop_triggers(api));

    for t in &api.triggers {
        let mut body = String::new();
        for k in &t.procedure_calls {
            let Some(spec) = api.procedure(*k) else { continue };
            let part = match (k, t.event) {
                (ProcedureKind::ChecktypeColumn, _) => checktype(table, spec),
                (ProcedureKind::ColumnPea, _) => pea(table, spec),
                (ProcedureKind::FrozenColumn, _) => frozen_guard_with(&table.name, spec, &upper),
                (ProcedureKind::JournalizeRow, TriggerEvent::Delete) => {
                    let jn = journal.expect("journal table of a journaled table");
                    let old: Vec<String> = table.primary_key.iter().map(|c| format!("OLD.{c}")).collect();
                    journal_insert(
                        jn,
                        &table.primary_key,
                        &format!("VALUES ('DEL', {}, {TIMESTAMP_NOW}, {})", user_expr(), old.join(", ")),
                    )
                }
                _ => continue,
            };
            if !part.is_empty() {
                write!(body, "  -- {k}\n{part}").unwrap();
            }
        }
        if body.is_empty() {
            body.push_str("  SELECT 1 WHERE 0;\n");
        }
        let when = if t.event == TriggerEvent::Update { format!(" WHEN {no_fixup}") } else { String::new() };
        write!(
            out,
            "CREATE TRIGGER {} BEFORE {} ON {} FOR EACH ROW{when}\nBEGIN\n{body}END;\n",
            t.name,
            t.event.sql_keyword(),
            table.name
        )
        .unwrap();
    }

    let sets = fixups(table, api);
    let jn = journal.filter(|_| api.has(ProcedureKind::JournalizeRow));
    if sets.is_empty() && jn.is_none() {
        return out;
    }
    for (event, suffix) in [(TriggerEvent::Insert, "AIR"), (TriggerEvent::Update, "AUR")] {
        let mut body = String::new();
        if !sets.is_empty() {
            write!(
                body,
                "  INSERT OR REPLACE INTO {SESSION_TABLE} (key, value) VALUES ('{FIXUP_KEY}', '1');\n  \
                 UPDATE {} SET {} WHERE rowid = NEW.rowid;\n  \
                 DELETE FROM {SESSION_TABLE} WHERE key = '{FIXUP_KEY}';\n",
                table.name,
                sets.join(", ")
            )
            .unwrap();
        }
        if let Some(jn) = jn {
            let cols: Vec<String> = table.columns.iter().map(|c| c.name.clone()).collect();
            body.push_str(&journal_insert(
                jn,
                &cols,
                &format!(
                    "SELECT '{}', {}, {TIMESTAMP_NOW}, {} FROM {} WHERE rowid = NEW.rowid",
                    event.journal_code(),
                    user_expr(),
                    cols.join(", "),
                    table.name
                ),
            ));
        }
        let when = if event == TriggerEvent::Update { format!(" WHEN {no_fixup}") } else { String::new() };
        write!(
            out,
            "CREATE TRIGGER {}_TAPIs_{suffix} AFTER {} ON {} FOR EACH ROW{when}\nBEGIN\n{body}END;\n",
            api.abbrev,
            event.sql_keyword(),
            table.name
        )
        .unwrap();
    }
    out
}
