//! Incremental migration between two physical models.
//!
//! Elements are matched by name. Every change is classified
//! [`Classification::Preserved`] when it cannot alter or lose stored data
//! and [`Classification::Forced`] otherwise:
//!
//! | change | classification |
//! |--------|----------------|
//! | CreateTable, CreateJournalTable | Preserved |
//! | DropTable, DropColumn | Forced |
//! | AddColumn | Preserved if nullable or with `init`, else Forced |
//! | AlterColumnType | Preserved for TEXT widening, NUMERIC widening keeping integer digits and scale, or an `init` change; else Forced |
//! | AlterNullability | NOT NULL → NULL Preserved, NULL → NOT NULL Forced |
//! | Add/DropConstraint PRIMARY KEY | Forced |
//! | DropConstraint FOREIGN KEY | Forced |
//! | AddConstraint FOREIGN KEY, Add/DropConstraint UNIQUE | Preserved |
//! | Create/Replace/DropTrigger | Preserved |
//!
//! Plans are ordered: trigger drops, constraint drops, table drops
//! (children first), column drops, table creations (parents first), column
//! additions, alterations, constraint additions, journal tables, triggers.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write;

use thiserror::Error;

use crate::model::physical::package_name;
use crate::model::{
    ChangeItem, ChangeKind, Classification, Column, ColumnOrigin, Constraint, MigrationPlan, NeutralType,
    PhysicalModel, Snapshot, Table, TableApi, TriggerSpec,
};
use crate::sql::{content_hash, embedded, header, oracle, DialectId, EmitError, Script, ScriptBundle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error(
        "ambiguous rename in table {table}: column {dropped} dropped and {added} added at the same position with the same type"
    )]
    AmbiguousRename { table: String, dropped: String, added: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MigrateError {
    #[error("{} forced change(s) need --allow-forced:\n{}", .0.len(), .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    ForcedChangesBlocked(Vec<ChangeItem>),
    #[error(transparent)]
    Emit(#[from] EmitError),
}

/// Classification of a change item from its kind and snapshots.
pub fn classify(kind: ChangeKind, before: Option<&Snapshot>, after: Option<&Snapshot>) -> Classification {
    use Classification::{Forced, Preserved};
    match (kind, before, after) {
        (ChangeKind::CreateTable | ChangeKind::CreateJournalTable, _, _) => Preserved,
        (ChangeKind::DropTable | ChangeKind::DropColumn, _, _) => Forced,
        (ChangeKind::AddColumn, _, Some(Snapshot::Column(c))) => {
            if c.nullable || c.init.is_some() {
                Preserved
            } else {
                Forced
            }
        }
        (ChangeKind::AlterColumnType, Some(Snapshot::Column(b)), Some(Snapshot::Column(a))) => {
            if widens(b.sql_type, a.sql_type) {
                Preserved
            } else {
                Forced
            }
        }
        (ChangeKind::AlterNullability, _, Some(Snapshot::Column(a))) => {
            if a.nullable {
                Preserved
            } else {
                Forced
            }
        }
        (ChangeKind::AddConstraint | ChangeKind::DropConstraint, b, a) => match (kind, a.or(b)) {
            (_, Some(Snapshot::Constraint(Constraint::PrimaryKey { .. }))) => Forced,
            (ChangeKind::DropConstraint, Some(Snapshot::Constraint(Constraint::ForeignKey(_)))) => Forced,
            _ => Preserved,
        },
        (ChangeKind::CreateTrigger | ChangeKind::ReplaceTrigger | ChangeKind::DropTrigger, _, _) => Preserved,
        _ => Forced,
    }
}

/// Whether every value of `from` is representable unchanged in `to`.
pub fn widens(from: NeutralType, to: NeutralType) -> bool {
    match (from, to) {
        (NeutralType::Text(a), NeutralType::Text(b)) => b >= a,
        (NeutralType::Numeric(p1, s1), NeutralType::Numeric(p2, s2)) => {
            s2 >= s1 && p2.saturating_sub(s2) >= p1.saturating_sub(s1)
        }
        (a, b) => a == b,
    }
}

fn item(kind: ChangeKind, path: String, before: Option<Snapshot>, after: Option<Snapshot>) -> ChangeItem {
    ChangeItem { classification: classify(kind, before.as_ref(), after.as_ref()), kind, path, before, after }
}

fn is_journal(t: &Table) -> bool {
    t.columns.first().is_some_and(|c| c.origin == ColumnOrigin::Journal)
}

/// Tables ordered so that every table comes after the tables it references.
fn parents_first<'a>(tables: &[&'a Table]) -> Vec<&'a Table> {
    let names: HashSet<&str> = tables.iter().map(|t| t.name.as_str()).collect();
    let mut done: HashSet<&str> = HashSet::new();
    let mut out = Vec::new();
    while out.len() < tables.len() {
        let before = out.len();
        for t in tables {
            if done.contains(t.name.as_str()) {
                continue;
            }
            let ready = t.foreign_keys.iter().all(|fk| {
                fk.referenced_table == t.name
                    || !names.contains(fk.referenced_table.as_str())
                    || done.contains(fk.referenced_table.as_str())
            });
            if ready {
                done.insert(&t.name);
                out.push(*t);
            }
        }
        if out.len() == before {
            out.extend(tables.iter().filter(|t| !done.contains(t.name.as_str())));
            break;
        }
    }
    out
}

fn triggers_of(pm: &PhysicalModel) -> BTreeMap<(String, String), (&TableApi, &TriggerSpec)> {
    pm.table_apis
        .iter()
        .flat_map(|api| api.triggers.iter().map(move |t| ((api.table_name.clone(), t.name.clone()), (api, t))))
        .collect()
}

pub fn diff(old: &PhysicalModel, new: &PhysicalModel) -> Result<MigrationPlan, DiffError> {
    let old_tables: Vec<&Table> = old.all_tables().collect();
    let new_tables: Vec<&Table> = new.all_tables().collect();
    let old_by_name: HashMap<&str, &Table> = old_tables.iter().map(|t| (t.name.as_str(), *t)).collect();
    let new_by_name: HashMap<&str, &Table> = new_tables.iter().map(|t| (t.name.as_str(), *t)).collect();

    let mut drop_triggers = Vec::new();
    let mut drop_fks = Vec::new();
    let mut drop_uniques = Vec::new();
    let mut drop_pks = Vec::new();
    let mut drop_tables = Vec::new();
    let mut drop_columns = Vec::new();
    let mut create_tables = Vec::new();
    let mut add_columns = Vec::new();
    let mut alters = Vec::new();
    let mut add_pks = Vec::new();
    let mut add_uniques = Vec::new();
    let mut add_fks = Vec::new();
    let mut create_journals = Vec::new();
    let mut triggers = Vec::new();

    for t in parents_first(&old_tables).into_iter().rev() {
        if !new_by_name.contains_key(t.name.as_str()) {
            drop_tables.push(item(ChangeKind::DropTable, t.name.clone(), Some(Snapshot::Table(t.clone())), None));
        }
    }

    for t in parents_first(&new_tables) {
        let Some(o) = old_by_name.get(t.name.as_str()) else {
            if is_journal(t) {
                create_journals.push(item(
                    ChangeKind::CreateJournalTable,
                    t.name.clone(),
                    None,
                    Some(Snapshot::Table(t.clone())),
                ));
            } else {
                create_tables.push(item(
                    ChangeKind::CreateTable,
                    t.name.clone(),
                    None,
                    Some(Snapshot::Table(t.clone())),
                ));
                for fk in &t.foreign_keys {
                    add_fks.push(item(
                        ChangeKind::AddConstraint,
                        format!("{}.{}", t.name, fk.name),
                        None,
                        Some(Snapshot::Constraint(Constraint::ForeignKey(fk.clone()))),
                    ));
                }
            }
            continue;
        };

        let dropped: Vec<(usize, &Column)> =
            o.columns.iter().enumerate().filter(|(_, c)| t.column(&c.name).is_none()).collect();
        let added: Vec<(usize, &Column)> =
            t.columns.iter().enumerate().filter(|(_, c)| o.column(&c.name).is_none()).collect();
        for (i, d) in &dropped {
            if let Some((_, a)) = added.iter().find(|(j, a)| j == i && a.sql_type == d.sql_type) {
                return Err(DiffError::AmbiguousRename {
                    table: t.name.clone(),
                    dropped: d.name.clone(),
                    added: a.name.clone(),
                });
            }
        }
        for (_, d) in &dropped {
            drop_columns.push(item(
                ChangeKind::DropColumn,
                format!("{}.{}", t.name, d.name),
                Some(Snapshot::Column((*d).clone())),
                None,
            ));
        }
        for (_, a) in &added {
            add_columns.push(item(
                ChangeKind::AddColumn,
                format!("{}.{}", t.name, a.name),
                None,
                Some(Snapshot::Column((*a).clone())),
            ));
        }
        for c in &t.columns {
            let Some(b) = o.column(&c.name) else { continue };
            let path = format!("{}.{}", t.name, c.name);
            if b.sql_type != c.sql_type || b.init != c.init {
                alters.push(item(
                    ChangeKind::AlterColumnType,
                    path.clone(),
                    Some(Snapshot::Column(b.clone())),
                    Some(Snapshot::Column(c.clone())),
                ));
            }
            if b.nullable != c.nullable {
                alters.push(item(
                    ChangeKind::AlterNullability,
                    path,
                    Some(Snapshot::Column(b.clone())),
                    Some(Snapshot::Column(c.clone())),
                ));
            }
        }

        let before: Vec<Constraint> = Constraint::of_table(o);
        let after: Vec<Constraint> = Constraint::of_table(t);
        for c in &before {
            if !after.contains(c) {
                let it = item(
                    ChangeKind::DropConstraint,
                    format!("{}.{}", t.name, c.name()),
                    Some(Snapshot::Constraint(c.clone())),
                    None,
                );
                match c {
                    Constraint::ForeignKey(_) => drop_fks.push(it),
                    Constraint::Unique(_) => drop_uniques.push(it),
                    Constraint::PrimaryKey { .. } => drop_pks.push(it),
                }
            }
        }
        for c in &after {
            if !before.contains(c) {
                let it = item(
                    ChangeKind::AddConstraint,
                    format!("{}.{}", t.name, c.name()),
                    None,
                    Some(Snapshot::Constraint(c.clone())),
                );
                match c {
                    Constraint::ForeignKey(_) => add_fks.push(it),
                    Constraint::Unique(_) => add_uniques.push(it),
                    Constraint::PrimaryKey { .. } => add_pks.push(it),
                }
            }
        }
    }

    let old_triggers = triggers_of(old);
    let new_triggers = triggers_of(new);
    for ((table, name), (_, spec)) in &old_triggers {
        if !new_triggers.contains_key(&(table.clone(), name.clone())) {
            drop_triggers.push(item(
                ChangeKind::DropTrigger,
                format!("{table}.{name}"),
                Some(Snapshot::Trigger((*spec).clone())),
                None,
            ));
        }
    }
    for api in &new.table_apis {
        for spec in &api.triggers {
            let key = (api.table_name.clone(), spec.name.clone());
            let path = format!("{}.{}", api.table_name, spec.name);
            match old_triggers.get(&key) {
                None => {
                    triggers.push(item(ChangeKind::CreateTrigger, path, None, Some(Snapshot::Trigger(spec.clone()))))
                }
                Some((old_api, old_spec)) => {
                    if *old_spec != spec || old_api.procedures != api.procedures {
                        triggers.push(item(
                            ChangeKind::ReplaceTrigger,
                            path,
                            Some(Snapshot::Trigger((*old_spec).clone())),
                            Some(Snapshot::Trigger(spec.clone())),
                        ));
                    }
                }
            }
        }
    }

    let items = [
        drop_triggers,
        drop_fks,
        drop_uniques,
        drop_pks,
        drop_tables,
        drop_columns,
        create_tables,
        add_columns,
        alters,
        add_pks,
        add_uniques,
        add_fks,
        create_journals,
        triggers,
    ]
    .into_iter()
    .flatten()
    .collect();
    Ok(MigrationPlan { items, target: new.clone() })
}

pub const MIGRATION_SCRIPTS: [&str; 2] = ["01_structure.sql", "02_tapis.sql"];

/// Scripts applying `plan`; refuses plans with Forced items unless allowed.
pub fn emit_migration(
    plan: &MigrationPlan,
    dialect: DialectId,
    allow_forced: bool,
) -> Result<ScriptBundle, MigrateError> {
    if !allow_forced && plan.has_forced() {
        return Err(MigrateError::ForcedChangesBlocked(plan.forced().cloned().collect()));
    }
    if plan.is_empty() {
        return Ok(ScriptBundle::default());
    }
    let (structure, tapis) = match dialect {
        DialectId::Oracle => oracle_migration(plan)?,
        DialectId::Embedded => embedded_migration(plan),
    };
    let hash = content_hash(&format!("{plan}{}", crate::text::physical_to_string(&plan.target)));
    Ok(ScriptBundle {
        scripts: MIGRATION_SCRIPTS
            .iter()
            .zip([structure, tapis])
            .map(|(name, body)| Script {
                name: name.to_string(),
                content: format!("{}{body}", header(dialect, name, &hash)),
            })
            .collect(),
    })
}

fn target_table<'a>(plan: &'a MigrationPlan, name: &str) -> &'a Table {
    plan.target.all_tables().find(|t| t.name == name).expect("plan item names a target table")
}

/// Tables whose table API must be regenerated.
fn api_tables(plan: &MigrationPlan) -> BTreeSet<String> {
    plan.items
        .iter()
        .filter(|i| matches!(i.kind, ChangeKind::CreateTrigger | ChangeKind::ReplaceTrigger))
        .map(|i| i.table().to_string())
        .collect()
}

fn abbrev_of_trigger(name: &str) -> &str {
    name.rsplit_once("_TAPIs_").map_or(name, |(a, _)| a)
}

fn oracle_migration(plan: &MigrationPlan) -> Result<(String, String), EmitError> {
    let mut out = String::new();
    let mut dropped_packages = BTreeSet::new();
    for it in &plan.items {
        let table = it.table();
        out.push('\n');
        match (it.kind, &it.before, &it.after) {
            (ChangeKind::DropTrigger, Some(Snapshot::Trigger(t)), _) => {
                writeln!(out, "DROP TRIGGER {};", t.name).unwrap();
                if plan.target.table_api(table).is_none() && dropped_packages.insert(table.to_string()) {
                    writeln!(out, "DROP PACKAGE {};", package_name(abbrev_of_trigger(&t.name))).unwrap();
                }
            }
            (ChangeKind::DropConstraint, Some(Snapshot::Constraint(c)), _) => {
                writeln!(out, "ALTER TABLE {table} DROP CONSTRAINT {} CASCADE;", c.name()).unwrap();
            }
            (ChangeKind::DropTable, Some(Snapshot::Table(t)), _) => {
                writeln!(out, "DROP TABLE {} CASCADE CONSTRAINTS;", t.name).unwrap();
                if t.has_surrogate() {
                    writeln!(out, "DROP SEQUENCE {};", oracle::sequence_name(t)).unwrap();
                }
            }
            (ChangeKind::DropColumn, Some(Snapshot::Column(c)), _) => {
                writeln!(out, "ALTER TABLE {table} DROP COLUMN {};", c.name).unwrap();
                if c.origin == ColumnOrigin::Surrogate {
                    let old_abbrev = target_table(plan, table).abbrev.clone();
                    writeln!(out, "DROP SEQUENCE {old_abbrev}_SEQ;").unwrap();
                }
            }
            (ChangeKind::CreateTable | ChangeKind::CreateJournalTable, _, Some(Snapshot::Table(t))) => {
                out.push_str(&oracle::create_table(t)?);
            }
            (ChangeKind::AddColumn, _, Some(Snapshot::Column(c))) => {
                writeln!(out, "ALTER TABLE {table} ADD ({});", oracle::column_def(c)?).unwrap();
                if c.origin == ColumnOrigin::Surrogate {
                    writeln!(out, "CREATE SEQUENCE {};", oracle::sequence_name(target_table(plan, table))).unwrap();
                }
            }
            (ChangeKind::AlterColumnType, _, Some(Snapshot::Column(c))) => {
                let mut def = oracle::column_def(&Column { nullable: true, ..c.clone() })?;
                if c.init.is_none() {
                    def.push_str(" DEFAULT NULL");
                }
                writeln!(out, "ALTER TABLE {table} MODIFY ({def});").unwrap();
            }
            (ChangeKind::AlterNullability, _, Some(Snapshot::Column(c))) => {
                let null = if c.nullable { "NULL" } else { "NOT NULL" };
                writeln!(out, "ALTER TABLE {table} MODIFY ({} {null});", c.name).unwrap();
            }
            (ChangeKind::AddConstraint, _, Some(Snapshot::Constraint(c))) => match c {
                Constraint::ForeignKey(fk) => out.push_str(&oracle::add_foreign_key(target_table(plan, table), fk)),
                Constraint::PrimaryKey { name, columns } => {
                    writeln!(out, "ALTER TABLE {table} ADD CONSTRAINT {name} PRIMARY KEY ({});", columns.join(", "))
                        .unwrap();
                }
                Constraint::Unique(u) => {
                    writeln!(out, "ALTER TABLE {table} ADD CONSTRAINT {} UNIQUE ({});", u.name, u.columns.join(", "))
                        .unwrap();
                }
            },
            (ChangeKind::CreateTrigger | ChangeKind::ReplaceTrigger, _, _) => {
                writeln!(out, "-- {it}").unwrap();
            }
            _ => unreachable!("malformed change item {it}"),
        }
    }
    let mut tapis = String::new();
    for table in api_tables(plan) {
        let api = plan.target.table_api(&table).expect("trigger item of a table API");
        let t = target_table(plan, &table);
        tapis.push('\n');
        tapis.push_str(&oracle::package(api, t, plan.target.journal_table(&table)));
        tapis.push_str(&oracle::table_triggers(api, t));
    }
    Ok((out, tapis))
}

/// SQLite cannot alter columns or constraints in place: every table with a
/// structural change is rebuilt under its final definition and its rows
/// copied over the columns both versions share.
fn embedded_migration(plan: &MigrationPlan) -> (String, String) {
    let mut rebuilt: Vec<&str> = Vec::new();
    let created: HashSet<&str> = plan
        .items
        .iter()
        .filter(|i| matches!(i.kind, ChangeKind::CreateTable | ChangeKind::CreateJournalTable))
        .map(|i| i.table())
        .collect();
    let dropped: HashSet<&str> =
        plan.items.iter().filter(|i| i.kind == ChangeKind::DropTable).map(|i| i.table()).collect();
    for it in &plan.items {
        let structural = matches!(
            it.kind,
            ChangeKind::AddColumn
                | ChangeKind::DropColumn
                | ChangeKind::AlterColumnType
                | ChangeKind::AlterNullability
                | ChangeKind::AddConstraint
                | ChangeKind::DropConstraint
        );
        let t = it.table();
        if structural && !created.contains(t) && !dropped.contains(t) && !rebuilt.contains(&t) {
            rebuilt.push(t);
        }
    }

    let mut out = String::from("\nPRAGMA foreign_keys = OFF;\nPRAGMA legacy_alter_table = ON;\nBEGIN;\n");
    for it in &plan.items {
        if let (ChangeKind::DropTrigger, Some(Snapshot::Trigger(t))) = (it.kind, &it.before) {
            writeln!(out, "DROP TRIGGER IF EXISTS {};", t.name).unwrap();
            let abbrev = abbrev_of_trigger(&t.name);
            writeln!(out, "DROP TRIGGER IF EXISTS {abbrev}_TAPIs_AIR;").unwrap();
            writeln!(out, "DROP TRIGGER IF EXISTS {abbrev}_TAPIs_AUR;").unwrap();
        }
    }
    for it in &plan.items {
        if it.kind == ChangeKind::DropTable {
            writeln!(out, "DROP TABLE IF EXISTS {};", it.table()).unwrap();
        }
    }
    if plan.target.table_apis.is_empty() && plan.items.iter().any(|i| i.kind == ChangeKind::DropTrigger) {
        writeln!(out, "DROP TABLE IF EXISTS {};", embedded::SESSION_TABLE).unwrap();
    }
    for name in &rebuilt {
        let t = target_table(plan, name);
        let staging = format!("{name}__new");
        let added: HashSet<&str> = plan
            .items
            .iter()
            .filter(|i| i.kind == ChangeKind::AddColumn && i.table() == *name)
            .filter_map(|i| i.path.split_once('.').map(|(_, c)| c))
            .collect();
        let common: Vec<&str> = t.columns.iter().map(|c| c.name.as_str()).filter(|c| !added.contains(c)).collect();
        out.push('\n');
        out.push_str(&embedded::create_table(t, &staging));
        writeln!(
            out,
            "INSERT INTO {staging} ({0}) SELECT {0} FROM {name};\nDROP TABLE {name};\nALTER TABLE {staging} RENAME TO {name};",
            common.join(", ")
        )
        .unwrap();
    }
    for it in &plan.items {
        if let (ChangeKind::CreateTable | ChangeKind::CreateJournalTable, Some(Snapshot::Table(t))) =
            (it.kind, &it.after)
        {
            out.push('\n');
            out.push_str(&embedded::create_table(t, &t.name));
        }
    }
    out.push_str("\nCOMMIT;\nPRAGMA legacy_alter_table = OFF;\nPRAGMA foreign_keys = ON;\n");

    let mut regen: BTreeSet<String> = api_tables(plan);
    for name in &rebuilt {
        if plan.target.table_api(name).is_some() {
            regen.insert(name.to_string());
        }
    }
    let mut tapis = String::new();
    if !regen.is_empty() {
        tapis.push('\n');
        tapis.push_str(&embedded::session_table());
    }
    for table in regen {
        let api = plan.target.table_api(&table).expect("table API of a regenerated table");
        let t = target_table(plan, &table);
        tapis.push_str(&embedded::table_triggers(api, t, plan.target.journal_table(&table)));
    }
    (out, tapis)
}
