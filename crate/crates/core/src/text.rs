//! Canonical text forms of logical (`.mld`) and physical (`.mpd`) models.
//! Output is deterministic and used for golden comparisons.

use std::fmt::Write;

use crate::model::physical::package_name;
use crate::model::{Column, DeleteRule, LogicalModel, PhysicalModel, Table};

pub fn logical_to_string(model: &LogicalModel) -> String {
    let mut out = String::new();
    writeln!(out, "logical {}", model.name).unwrap();
    for t in &model.tables {
        write_table(&mut out, "table", t);
    }
    for (concept, target) in &model.trace_links {
        writeln!(out, "trace {concept} -> {target}").unwrap();
    }
    out
}

pub fn physical_to_string(model: &PhysicalModel) -> String {
    let mut out = logical_to_string(&model.logical);
    for api in &model.table_apis {
        writeln!(out, "api {} package={}", api.table_name, package_name(&api.abbrev)).unwrap();
        for p in &api.procedures {
            write!(out, "  procedure {} ({})", p.kind, p.target_columns.join(", ")).unwrap();
            if let Some(e) = &p.error {
                write!(out, " error {} {} {:?}", e.code, e.key, e.text).unwrap();
            }
            out.push('\n');
        }
        for t in &api.triggers {
            let calls: Vec<_> = t.procedure_calls.iter().map(|k| k.name()).collect();
            writeln!(out, "  trigger {} BEFORE {} calls [{}]", t.name, t.event.sql_keyword(), calls.join(", "))
                .unwrap();
        }
        out.push_str("end\n");
    }
    for t in &model.journal_tables {
        write_table(&mut out, "journal", t);
    }
    out
}

fn write_table(out: &mut String, keyword: &str, t: &Table) {
    write!(out, "{keyword} {} abbrev={}", t.name, t.abbrev).unwrap();
    if t.journaled {
        out.push_str(" journaled");
    }
    out.push('\n');
    for c in &t.columns {
        write_column(out, c);
    }
    if !t.primary_key.is_empty() {
        writeln!(out, "  primary key {} ({})", t.primary_key_name(), t.primary_key.join(", ")).unwrap();
    }
    for u in &t.uniques {
        writeln!(out, "  unique {} ({})", u.name, u.columns.join(", ")).unwrap();
    }
    for fk in &t.foreign_keys {
        write!(
            out,
            "  foreign key {} ({}) references {} ({})",
            fk.name,
            fk.columns.join(", "),
            fk.referenced_table,
            fk.referenced_columns.join(", ")
        )
        .unwrap();
        if fk.identifying {
            out.push_str(" identifying");
        }
        if fk.nullable {
            out.push_str(" optional");
        }
        out.push_str(match fk.on_delete {
            DeleteRule::Cascade => " on delete cascade",
            DeleteRule::Restrict => " on delete restrict",
        });
        out.push('\n');
    }
    out.push_str("end\n");
}

fn write_column(out: &mut String, c: &Column) {
    write!(
        out,
        "  column {} {} {} {} type={}",
        c.name,
        c.sql_type,
        if c.nullable { "NULL" } else { "NOT NULL" },
        c.origin.keyword(),
        c.logical_type
    )
    .unwrap();
    if c.frozen {
        out.push_str(" frozen");
    }
    if c.uppercase {
        out.push_str(" uppercase");
    }
    if let Some(init) = c.init {
        write!(out, " init={init}").unwrap();
    }
    if let Some(g) = &c.pea_fk_group {
        write!(out, " group={g}").unwrap();
    }
    if c.mandatory_when_linked {
        out.push_str(" mandatory-when-linked");
    }
    out.push('\n');
}
