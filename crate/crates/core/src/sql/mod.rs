//! SQL rendering of physical models.
//!
//! Type mapping:
//!
//! | neutral | oracle | embedded |
//! |---------|--------|----------|
//! | TEXT(n) | VARCHAR2(n) | TEXT(n) |
//! | INTEGER | INTEGER | INTEGER |
//! | NUMERIC(p,s) | NUMBER(p,s) | NUMERIC(p,s) |
//! | DATE | DATE | TEXT, ISO-8601 `YYYY-MM-DD` |
//! | TIMESTAMP | DATE | TEXT, ISO-8601 `YYYY-MM-DDTHH:MM:SS.SSS` |
//! | BOOLEAN | NUMBER(1) | INTEGER |
//! | INTERVAL | INTERVAL DAY TO SECOND | INTEGER seconds |
//!
//! The oracle dialect renders table APIs as packages called from triggers.
//! The embedded dialect targets SQLite, which has no stored procedures:
//! checks are inlined into BEFORE triggers and value rewrites (uppercase,
//! defaults) plus journaling run in AFTER triggers.

pub(crate) mod embedded;
pub(crate) mod oracle;

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{ErrorMessage, PhysicalModel, ProcedureKind, ProcedureSpec};
use crate::{GENERATOR_NAME, GENERATOR_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub enum DialectId {
    #[default]
    Oracle,
    Embedded,
}

impl DialectId {
    pub fn name(self) -> &'static str {
        match self {
            DialectId::Oracle => "oracle",
            DialectId::Embedded => "embedded",
        }
    }
}

impl fmt::Display for DialectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DialectId {
    type Err = EmitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oracle" => Ok(DialectId::Oracle),
            "embedded" => Ok(DialectId::Embedded),
            other => Err(EmitError::UnsupportedDialect(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("unsupported dialect `{0}`")]
    UnsupportedDialect(String),
    #[error("dialect {dialect} cannot express {feature}")]
    UnsupportedFeature { dialect: DialectId, feature: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Script {
    pub name: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ScriptBundle {
    pub scripts: Vec<Script>,
}

impl ScriptBundle {
    pub fn script(&self, name: &str) -> Option<&Script> {
        self.scripts.iter().find(|s| s.name == name)
    }

    pub fn is_empty(&self) -> bool {
        self.scripts.is_empty()
    }

    /// Scripts concatenated in order.
    pub fn concat(&self) -> String {
        self.scripts.iter().map(|s| s.content.as_str()).collect()
    }

    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        for s in &self.scripts {
            fs::write(dir.join(&s.name), &s.content)?;
        }
        Ok(())
    }
}

pub const HASH_LINE_PREFIX: &str = "-- source-hash: ";

pub fn content_hash(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

pub(crate) fn header(dialect: DialectId, script: &str, hash: &str) -> String {
    format!(
        "-- {GENERATOR_NAME} {GENERATOR_VERSION}\n-- dialect: {dialect}\n-- script: {script}\n{HASH_LINE_PREFIX}{hash}\n"
    )
}

/// Drops the source-hash header line, for comparisons across model edits.
pub fn strip_hash(script: &str) -> String {
    script.lines().filter(|l| !l.starts_with(HASH_LINE_PREFIX)).map(|l| format!("{l}\n")).collect()
}

pub(crate) fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// `Table: T , Colonne: c , <key> , <text>`
pub fn error_payload(table: &str, column: &str, key: &str, text: &str) -> String {
    format!("Table: {table} , Colonne: {column} , {key} , {text}")
}

pub(crate) fn error_for(table: &str, column: &str, err: &ErrorMessage) -> String {
    error_payload(table, column, &err.key, &err.text)
}

pub const SCRIPT_NAMES: [&str; 4] = ["01_tables.sql", "02_journal.sql", "03_tapis.sql", "04_triggers.sql"];

pub fn emit_ddl(physical: &PhysicalModel, dialect: DialectId) -> Result<ScriptBundle, EmitError> {
    let hash = content_hash(&crate::text::physical_to_string(physical));
    let bodies = match dialect {
        DialectId::Oracle => oracle::emit(physical)?,
        DialectId::Embedded => embedded::emit(physical)?,
    };
    Ok(ScriptBundle {
        scripts: SCRIPT_NAMES
            .iter()
            .zip(bodies)
            .map(|(name, body)| Script {
                name: name.to_string(),
                content: format!("{}{body}", header(dialect, name, &hash)),
            })
            .collect(),
    })
}

/// Guard raising the frozen error when a stored value changes. Two nulls
/// compare equal and a null old value accepts its first assignment.
pub fn render_frozen_guard(table: &str, proc: &ProcedureSpec, dialect: DialectId) -> String {
    debug_assert_eq!(proc.kind, ProcedureKind::FrozenColumn);
    match dialect {
        DialectId::Oracle => oracle::frozen_guard(table, proc),
        DialectId::Embedded => embedded::frozen_guard(table, proc),
    }
}
