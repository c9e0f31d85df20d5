//! Physical model (MPD): the logical model plus table APIs and journal tables.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::logical::{LogicalModel, Table};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhysicalModel {
    pub logical: LogicalModel,
    pub table_apis: Vec<TableApi>,
    pub journal_tables: Vec<Table>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableApi {
    pub table_name: String,
    pub abbrev: String,
    pub triggers: Vec<TriggerSpec>,
    pub procedures: Vec<ProcedureSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TriggerEvent {
    Insert,
    Update,
    Delete,
}

impl TriggerEvent {
    /// `BIR`, `BUR`, `BDR`: before insert/update/delete for each row.
    pub fn suffix(self) -> &'static str {
        match self {
            TriggerEvent::Insert => "BIR",
            TriggerEvent::Update => "BUR",
            TriggerEvent::Delete => "BDR",
        }
    }

    pub fn sql_keyword(self) -> &'static str {
        match self {
            TriggerEvent::Insert => "INSERT",
            TriggerEvent::Update => "UPDATE",
            TriggerEvent::Delete => "DELETE",
        }
    }

    /// Operation code written to `JN_OPERATION`.
    pub fn journal_code(self) -> &'static str {
        match self {
            TriggerEvent::Insert => "INS",
            TriggerEvent::Update => "UPD",
            TriggerEvent::Delete => "DEL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TriggerTiming {
    Before,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TriggerSpec {
    pub name: String,
    pub event: TriggerEvent,
    pub timing: TriggerTiming,
    pub procedure_calls: Vec<ProcedureKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ProcedureKind {
    AutogenColumnUpd,
    AutogenColumn,
    ChecktypeColumn,
    UppercaseColumn,
    ColumnPea,
    FrozenColumn,
    JournalizeRow,
}

impl ProcedureKind {
    pub const ALL: [ProcedureKind; 7] = [
        ProcedureKind::AutogenColumnUpd,
        ProcedureKind::AutogenColumn,
        ProcedureKind::ChecktypeColumn,
        ProcedureKind::UppercaseColumn,
        ProcedureKind::ColumnPea,
        ProcedureKind::FrozenColumn,
        ProcedureKind::JournalizeRow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProcedureKind::AutogenColumnUpd => "autogen_column_upd",
            ProcedureKind::AutogenColumn => "autogen_column",
            ProcedureKind::ChecktypeColumn => "checktype_column",
            ProcedureKind::UppercaseColumn => "uppercase_column",
            ProcedureKind::ColumnPea => "column_PEA",
            ProcedureKind::FrozenColumn => "frozen_column",
            ProcedureKind::JournalizeRow => "journalize_row",
        }
    }

    pub fn from_name(name: &str) -> Option<ProcedureKind> {
        ProcedureKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for ProcedureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Application error raised by a checking procedure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorMessage {
    pub code: i32,
    pub key: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProcedureSpec {
    pub kind: ProcedureKind,
    pub target_columns: Vec<String>,
    pub error: Option<ErrorMessage>,
}

pub const FROZEN_ERROR_CODE: i32 = -20001;
pub const CHECKTYPE_ERROR_CODE: i32 = -20002;
pub const PEA_ERROR_CODE: i32 = -20003;

pub const FROZEN_MESSAGE_KEY: &str = "mpd.constraint.mess.err.column.frozen";
pub const FROZEN_MESSAGE_TEXT: &str = "La valeur de la colonne n'est pas modifiable";
pub const CHECKTYPE_MESSAGE_KEY: &str = "mpd.constraint.mess.err.column.checktype";
pub const CHECKTYPE_MESSAGE_TEXT: &str = "La valeur de la colonne ne respecte pas son type";
pub const PEA_MESSAGE_KEY: &str = "mpd.constraint.mess.err.column.pea";
pub const PEA_MESSAGE_TEXT: &str = "La valeur de la colonne ne peut être saisie que si l'association existe";
pub const PEA_MANDATORY_MESSAGE_TEXT: &str = "La valeur de la colonne est obligatoire lorsque l'association existe";

pub fn trigger_name(abbrev: &str, event: TriggerEvent) -> String {
    format!("{abbrev}_TAPIs_{}", event.suffix())
}

pub fn package_name(abbrev: &str) -> String {
    format!("{abbrev}_TAPIs")
}

pub fn journal_table_name(table: &str) -> String {
    format!("JN_{table}")
}

impl TableApi {
    pub fn procedure(&self, kind: ProcedureKind) -> Option<&ProcedureSpec> {
        self.procedures.iter().find(|p| p.kind == kind)
    }

    pub fn trigger(&self, event: TriggerEvent) -> Option<&TriggerSpec> {
        self.triggers.iter().find(|t| t.event == event)
    }

    pub fn has(&self, kind: ProcedureKind) -> bool {
        self.procedure(kind).is_some()
    }

    pub fn verify(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut kinds = HashSet::new();
        for p in &self.procedures {
            if !kinds.insert(p.kind) {
                out.push(format!("duplicate procedure {}", p.kind));
            }
        }
        for t in &self.triggers {
            if t.name != trigger_name(&self.abbrev, t.event) {
                out.push(format!("trigger name {} does not follow <abbrev>_TAPIs_<event>", t.name));
            }
            let expected = expected_calls(t.event, self.has(ProcedureKind::JournalizeRow));
            if t.procedure_calls != expected {
                out.push(format!("trigger {} call order differs from the canonical chain", t.name));
            }
        }
        out
    }
}

/// Canonical call chain of each trigger.
pub fn expected_calls(event: TriggerEvent, journaled: bool) -> Vec<ProcedureKind> {
    use ProcedureKind::*;
    let mut calls = match event {
        TriggerEvent::Update => {
            vec![AutogenColumnUpd, AutogenColumn, ChecktypeColumn, UppercaseColumn, ColumnPea, FrozenColumn]
        }
        TriggerEvent::Insert => vec![AutogenColumn, ChecktypeColumn, UppercaseColumn, ColumnPea],
        TriggerEvent::Delete => vec![],
    };
    if journaled {
        calls.push(JournalizeRow);
    }
    calls
}

impl PhysicalModel {
    pub fn table_api(&self, table: &str) -> Option<&TableApi> {
        self.table_apis.iter().find(|a| a.table_name == table)
    }

    pub fn journal_table(&self, table: &str) -> Option<&Table> {
        let name = journal_table_name(table);
        self.journal_tables.iter().find(|t| t.name == name)
    }

    /// Logical tables followed by journal tables.
    pub fn all_tables(&self) -> impl Iterator<Item = &Table> {
        self.logical.tables.iter().chain(&self.journal_tables)
    }

    pub fn verify(&self) -> Vec<String> {
        let mut out = self.logical.verify();
        for api in &self.table_apis {
            if self.logical.table(&api.table_name).is_none() {
                out.push(format!("table API for unknown table {}", api.table_name));
            }
            out.extend(api.verify().into_iter().map(|v| format!("table API {}: {v}", api.table_name)));
        }
        for t in &self.logical.tables {
            if t.journaled != self.journal_table(&t.name).is_some() {
                out.push(format!("journal table presence differs from journaled flag on {}", t.name));
            }
        }
        out
    }
}
