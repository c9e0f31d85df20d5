use std::fmt::Write;

use super::{error_for, quote, DialectId, EmitError};
use crate::model::physical::{expected_calls, package_name, PEA_MANDATORY_MESSAGE_TEXT};
use crate::model::{
    BaseType, Column, ColumnOrigin, DeleteRule, ForeignKey, InitExpr, NeutralType, PhysicalModel, ProcedureKind,
    ProcedureSpec, Refinement, Table, TableApi, TriggerEvent,
};
use crate::tapi::{JN_DATETIME, JN_OPERATION, JN_USER};

const MAX_VARCHAR2: u32 = 4000;
const MAX_PRECISION: u32 = 38;

fn unsupported(feature: String) -> EmitError {
    EmitError::UnsupportedFeature { dialect: DialectId::Oracle, feature }
}

pub(crate) fn type_name(t: NeutralType) -> Result<String, EmitError> {
    Ok(match t {
        NeutralType::Text(n) if n > MAX_VARCHAR2 => {
            return Err(unsupported(format!("TEXT({n}) beyond VARCHAR2({MAX_VARCHAR2})")))
        }
        NeutralType::Numeric(p, _) if p > MAX_PRECISION => {
            return Err(unsupported(format!("NUMERIC precision {p} beyond {MAX_PRECISION}")))
        }
        NeutralType::Text(n) => format!("VARCHAR2({n})"),
        NeutralType::Integer => "INTEGER".into(),
        NeutralType::Numeric(p, s) => format!("NUMBER({p},{s})"),
        NeutralType::Date | NeutralType::Timestamp => "DATE".into(),
        NeutralType::Boolean => "NUMBER(1)".into(),
        NeutralType::Interval => "INTERVAL DAY TO SECOND".into(),
    })
}

fn now_expr(c: &Column) -> &'static str {
    if c.logical_type.base == BaseType::Date {
        "TRUNC(SYSDATE)"
    } else {
        "SYSDATE"
    }
}

pub(crate) fn column_def(c: &Column) -> Result<String, EmitError> {
    let mut out = format!("{} {}", c.name, type_name(c.sql_type)?);
    if c.init == Some(InitExpr::Now) {
        write!(out, " DEFAULT {}", now_expr(c)).unwrap();
    }
    if !c.nullable {
        out.push_str(" NOT NULL");
    }
    Ok(out)
}

pub(crate) fn sequence_name(t: &Table) -> String {
    format!("{}_SEQ", t.abbrev)
}

/// CREATE TABLE with primary key and unique constraints; foreign keys are
/// added separately so tables may be created in any order.
pub(crate) fn create_table(t: &Table) -> Result<String, EmitError> {
    let mut lines = Vec::new();
    for c in &t.columns {
        lines.push(format!("  {}", column_def(c)?));
    }
    if !t.primary_key.is_empty() {
        lines.push(format!("  CONSTRAINT {} PRIMARY KEY ({})", t.primary_key_name(), t.primary_key.join(", ")));
    }
    for u in &t.uniques {
        lines.push(format!("  CONSTRAINT {} UNIQUE ({})", u.name, u.columns.join(", ")));
    }
    let mut out = format!("CREATE TABLE {} (\n{}\n);\n", t.name, lines.join(",\n"));
    if t.has_surrogate() {
        writeln!(out, "CREATE SEQUENCE {};", sequence_name(t)).unwrap();
    }
    Ok(out)
}

pub(crate) fn add_foreign_key(t: &Table, fk: &ForeignKey) -> String {
    format!(
        "ALTER TABLE {} ADD CONSTRAINT {} FOREIGN KEY ({}) REFERENCES {} ({}){};\n",
        t.name,
        fk.name,
        fk.columns.join(", "),
        fk.referenced_table,
        fk.referenced_columns.join(", "),
        match fk.on_delete {
            DeleteRule::Cascade => " ON DELETE CASCADE",
            DeleteRule::Restrict => "",
        }
    )
}

pub(crate) fn emit(pm: &PhysicalModel) -> Result<[String; 4], EmitError> {
    let mut tables = String::new();
    for t in &pm.logical.tables {
        tables.push('\n');
        tables.push_str(&create_table(t)?);
    }
    let fks: String =
        pm.logical.tables.iter().flat_map(|t| t.foreign_keys.iter().map(move |fk| add_foreign_key(t, fk))).collect();
    if !fks.is_empty() {
        tables.push('\n');
        tables.push_str(&fks);
    }

    let mut journal = String::new();
    for t in &pm.journal_tables {
        journal.push('\n');
        journal.push_str(&create_table(t)?);
    }

    let mut tapis = String::new();
    let mut triggers = String::new();
    for api in &pm.table_apis {
        let table = pm.logical.table(&api.table_name).expect("table API of a known table");
        tapis.push('\n');
        tapis.push_str(&package(api, table, pm.journal_table(&table.name)));
        triggers.push_str(&table_triggers(api, table));
    }
    Ok([tables, journal, tapis, triggers])
}

/// Procedures the triggers call, whether or not they have work to do.
fn package_procedures(api: &TableApi) -> Vec<ProcedureKind> {
    let mut kinds: Vec<ProcedureKind> = api
        .triggers
        .iter()
        .flat_map(|t| t.procedure_calls.iter().copied())
        .chain(api.procedures.iter().map(|p| p.kind))
        .collect();
    kinds.sort();
    kinds.dedup();
    kinds
}

fn signature(kind: ProcedureKind, table: &str) -> String {
    match kind {
        ProcedureKind::FrozenColumn => {
            format!("PROCEDURE frozen_column(pio_newrec IN OUT {table}%ROWTYPE, pio_oldrec IN OUT {table}%ROWTYPE)")
        }
        ProcedureKind::JournalizeRow => {
            format!("PROCEDURE journalize_row(pi_operation IN VARCHAR2, pi_rec IN {table}%ROWTYPE)")
        }
        other => format!("PROCEDURE {other}(pio_newrec IN OUT {table}%ROWTYPE)"),
    }
}

pub(crate) fn package(api: &TableApi, table: &Table, journal: Option<&Table>) -> String {
    let pkg = package_name(&api.abbrev);
    let kinds = package_procedures(api);
    let mut out = format!("CREATE OR REPLACE PACKAGE {pkg} IS\n");
    for k in &kinds {
        writeln!(out, "  {};", signature(*k, &table.name)).unwrap();
    }
    writeln!(out, "END {pkg};\n/\n").unwrap();
    writeln!(out, "CREATE OR REPLACE PACKAGE BODY {pkg} IS").unwrap();
    for (i, k) in kinds.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "  {} IS", signature(*k, &table.name)).unwrap();
        out.push_str("  BEGIN\n");
        let body = match api.procedure(*k) {
            Some(spec) => procedure_body(spec, table, journal),
            None => String::new(),
        };
        if body.is_empty() {
            out.push_str("    NULL;\n");
        } else {
            out.push_str(&body);
        }
        out.push_str("  END;\n");
    }
    writeln!(out, "END {pkg};\n/").unwrap();
    out
}

fn raise(code: i32, payload: &str) -> String {
    format!("raise_application_error({code}, {});", quote(payload))
}

fn procedure_body(spec: &ProcedureSpec, table: &Table, journal: Option<&Table>) -> String {
    let mut out = String::new();
    match spec.kind {
        ProcedureKind::AutogenColumnUpd => {}
        ProcedureKind::AutogenColumn => {
            for name in &spec.target_columns {
                let c = table.column(name).expect("target column");
                let value = if c.origin == ColumnOrigin::Surrogate {
                    format!("{}.NEXTVAL", sequence_name(table))
                } else {
                    now_expr(c).to_string()
                };
                write!(
                    out,
                    "    IF pio_newrec.{name} IS NULL THEN\n      pio_newrec.{name} := {value};\n    END IF;\n"
                )
                .unwrap();
            }
        }
        ProcedureKind::ChecktypeColumn => {
            let err = spec.error.as_ref().expect("checktype error");
            for name in &spec.target_columns {
                let c = table.column(name).expect("target column");
                let v = format!("pio_newrec.{name}");
                let ctl = "'[' || CHR(9) || CHR(10) || CHR(13) || ']'";
                let cond = match c.logical_type.base.refinement() {
                    Some(Refinement::Word) => {
                        format!("INSTR({v}, ' ') > 0 OR REGEXP_LIKE({v}, {ctl})")
                    }
                    Some(Refinement::Token) => {
                        format!("{v} <> TRIM({v}) OR INSTR({v}, '  ') > 0 OR REGEXP_LIKE({v}, {ctl})")
                    }
                    None => continue,
                };
                write!(
                    out,
                    "    IF {cond} THEN\n      {}\n    END IF;\n",
                    raise(err.code, &error_for(&table.name, name, err))
                )
                .unwrap();
            }
        }
        ProcedureKind::UppercaseColumn => {
            for name in &spec.target_columns {
                writeln!(out, "    pio_newrec.{name} := UPPER(pio_newrec.{name});").unwrap();
            }
        }
        ProcedureKind::ColumnPea => {
            let err = spec.error.as_ref().expect("PEA error");
            for name in &spec.target_columns {
                let c = table.column(name).expect("target column");
                let fk = table
                    .foreign_key(c.pea_fk_group.as_deref().unwrap_or_default())
                    .expect("PEA group names a foreign key");
                let unlinked: Vec<String> = fk.columns.iter().map(|f| format!("pio_newrec.{f} IS NULL")).collect();
                write!(
                    out,
                    "    IF {} AND pio_newrec.{name} IS NOT NULL THEN\n      {}\n    END IF;\n",
                    unlinked.join(" AND "),
                    raise(err.code, &error_for(&table.name, name, err))
                )
                .unwrap();
                if c.mandatory_when_linked {
                    let linked: Vec<String> =
                        fk.columns.iter().map(|f| format!("pio_newrec.{f} IS NOT NULL")).collect();
                    let payload = super::error_payload(&table.name, name, &err.key, PEA_MANDATORY_MESSAGE_TEXT);
                    write!(
                        out,
                        "    IF {} AND pio_newrec.{name} IS NULL THEN\n      {}\n    END IF;\n",
                        linked.join(" AND "),
                        raise(err.code, &payload)
                    )
                    .unwrap();
                }
            }
        }
        ProcedureKind::FrozenColumn => out = frozen_guard(&table.name, spec),
        ProcedureKind::JournalizeRow => {
            let jn = journal.expect("journal table of a journaled table");
            let insert = |cols: &[String]| {
                format!(
                    "INSERT INTO {} ({JN_OPERATION}, {JN_USER}, {JN_DATETIME}, {})\n      VALUES (pi_operation, USER, SYSDATE, {});",
                    jn.name,
                    cols.join(", "),
                    cols.iter().map(|c| format!("pi_rec.{c}")).collect::<Vec<_>>().join(", ")
                )
            };
            write!(
                out,
                "    IF pi_operation = 'DEL' THEN\n      {}\n    ELSE\n      {}\n    END IF;\n",
                insert(&table.primary_key),
                insert(&spec.target_columns)
            )
            .unwrap();
        }
    }
    out
}

pub(crate) fn frozen_guard(table: &str, spec: &ProcedureSpec) -> String {
    let Some(err) = &spec.error else {
        return String::new();
    };
    let mut out = String::new();
    for name in &spec.target_columns {
        let raise = raise(err.code, &error_for(table, name, err));
        write!(
            out,
            "    IF pio_newrec.{name} <> pio_oldrec.{name} THEN\n      {raise}\n    END IF;\n    \
             IF pio_newrec.{name} IS NULL AND pio_oldrec.{name} IS NOT NULL THEN\n      {raise}\n    END IF;\n"
        )
        .unwrap();
    }
    out
}

fn call(pkg: &str, kind: ProcedureKind, event: TriggerEvent) -> String {
    match kind {
        ProcedureKind::FrozenColumn => format!("{pkg}.frozen_column(vl_newrec, vl_oldrec);"),
        ProcedureKind::JournalizeRow => {
            let rec = if event == TriggerEvent::Delete { "vl_oldrec" } else { "vl_newrec" };
            format!("{pkg}.journalize_row('{}', {rec});", event.journal_code())
        }
        other => format!("{pkg}.{other}(vl_newrec);"),
    }
}

pub(crate) fn table_triggers(api: &TableApi, table: &Table) -> String {
    let pkg = package_name(&api.abbrev);
    let mut out = String::new();
    for t in &api.triggers {
        let uses_new = t.event != TriggerEvent::Delete;
        let uses_old = t.event != TriggerEvent::Insert;
        debug_assert_eq!(t.procedure_calls, expected_calls(t.event, table.journaled));
        write!(
            out,
            "\nCREATE OR REPLACE TRIGGER {}\nBEFORE {} ON {} FOR EACH ROW\nDECLARE\n",
            t.name,
            t.event.sql_keyword(),
            table.name
        )
        .unwrap();
        if uses_new {
            writeln!(out, "  vl_newrec {}%ROWTYPE;", table.name).unwrap();
        }
        if uses_old {
            writeln!(out, "  vl_oldrec {}%ROWTYPE;", table.name).unwrap();
        }
        out.push_str("BEGIN\n");
        if uses_new {
            for c in &table.columns {
                writeln!(out, "  vl_newrec.{0} := :NEW.{0};", c.name).unwrap();
            }
        }
        if uses_old {
            for c in &table.columns {
                writeln!(out, "  vl_oldrec.{0} := :OLD.{0};", c.name).unwrap();
            }
        }
        for k in &t.procedure_calls {
            writeln!(out, "  {}", call(&pkg, *k, t.event)).unwrap();
        }
        if uses_new {
            for c in &table.columns {
                writeln!(out, "  :NEW.{0} := vl_newrec.{0};", c.name).unwrap();
            }
        }
        out.push_str("END;\n/\n");
    }
    out
}
