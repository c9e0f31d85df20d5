//! Relational logical model (MLD), dialect-neutral.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::conceptual::InitExpr;
use super::types::{NeutralType, W3CType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LogicalModel {
    pub name: String,
    pub tables: Vec<Table>,
    pub trace_links: BTreeMap<ConceptId, LogicalId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Table {
    pub name: String,
    pub abbrev: String,
    pub columns: Vec<Column>,
    /// Empty only for journal tables.
    pub primary_key: Vec<String>,
    pub foreign_keys: Vec<ForeignKey>,
    pub uniques: Vec<UniqueConstraint>,
    pub journaled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ColumnOrigin {
    OwnAttribute,
    PeaAttribute,
    ForeignKey,
    Surrogate,
    /// Bookkeeping columns of journal tables.
    Journal,
}

impl ColumnOrigin {
    pub fn keyword(self) -> &'static str {
        match self {
            ColumnOrigin::OwnAttribute => "attribute",
            ColumnOrigin::PeaAttribute => "pea",
            ColumnOrigin::ForeignKey => "fk",
            ColumnOrigin::Surrogate => "surrogate",
            ColumnOrigin::Journal => "journal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Column {
    pub name: String,
    pub logical_type: W3CType,
    pub sql_type: NeutralType,
    pub nullable: bool,
    pub origin: ColumnOrigin,
    pub frozen: bool,
    pub uppercase: bool,
    pub init: Option<InitExpr>,
    /// Foreign key whose presence gates this PEA column.
    pub pea_fk_group: Option<String>,
    /// «M» on a PEA attribute: required whenever the link exists.
    pub mandatory_when_linked: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DeleteRule {
    Cascade,
    Restrict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForeignKey {
    pub name: String,
    pub columns: Vec<String>,
    pub referenced_table: String,
    pub referenced_columns: Vec<String>,
    pub identifying: bool,
    pub nullable: bool,
    pub on_delete: DeleteRule,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniqueConstraint {
    pub name: String,
    pub columns: Vec<String>,
}

/// Conceptual element identity used by trace links.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ConceptId {
    Entity(String),
    Attribute { entity: String, attribute: String },
    Association(String),
    PeaAttribute { association: String, attribute: String },
}

/// Logical element identity used by trace links.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LogicalId {
    Table(String),
    Column { table: String, column: String },
    ForeignKey { table: String, name: String },
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConceptId::Entity(e) => write!(f, "entity:{e}"),
            ConceptId::Attribute { entity, attribute } => write!(f, "attribute:{entity}.{attribute}"),
            ConceptId::Association(a) => write!(f, "association:{a}"),
            ConceptId::PeaAttribute { association, attribute } => {
                write!(f, "pea:{association}.{attribute}")
            }
        }
    }
}

impl fmt::Display for LogicalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicalId::Table(t) => write!(f, "table:{t}"),
            LogicalId::Column { table, column } => write!(f, "column:{table}.{column}"),
            LogicalId::ForeignKey { table, name } => write!(f, "fk:{table}.{name}"),
        }
    }
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn primary_key_name(&self) -> String {
        format!("PK_{}", self.abbrev)
    }

    pub fn foreign_key(&self, name: &str) -> Option<&ForeignKey> {
        self.foreign_keys.iter().find(|f| f.name == name)
    }

    pub fn has_surrogate(&self) -> bool {
        self.columns.iter().any(|c| c.origin == ColumnOrigin::Surrogate)
    }

    /// Natural key other tables refer to: the unique constraint `UID1_<abbrev>`
    /// when the table carries a surrogate key, the primary key otherwise.
    pub fn natural_key(&self) -> &[String] {
        if self.has_surrogate() {
            let uid1 = format!("UID1_{}", self.abbrev);
            if let Some(u) = self.uniques.iter().find(|u| u.name == uid1) {
                return &u.columns;
            }
        }
        &self.primary_key
    }

    pub fn verify(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut names = HashSet::new();
        for c in &self.columns {
            if !names.insert(c.name.to_lowercase()) {
                out.push(format!("duplicate column {}", c.name));
            }
            out.extend(c.verify().into_iter().map(|v| format!("column {}: {v}", c.name)));
        }
        if self.primary_key.is_empty() {
            out.push("empty primary key".to_string());
        }
        for pk in &self.primary_key {
            match self.column(pk) {
                None => out.push(format!("primary key column {pk} does not exist")),
                Some(c) if c.nullable => out.push(format!("primary key column {pk} is nullable")),
                _ => {}
            }
        }
        for fk in &self.foreign_keys {
            for c in &fk.columns {
                if self.column(c).is_none() {
                    out.push(format!("foreign key {}: column {c} does not exist", fk.name));
                }
                if fk.identifying && !self.primary_key.contains(c) {
                    out.push(format!("identifying foreign key {}: column {c} is not in the primary key", fk.name));
                }
            }
            if fk.identifying && fk.nullable {
                out.push(format!("identifying foreign key {} is nullable", fk.name));
            }
            if fk.columns.len() != fk.referenced_columns.len() {
                out.push(format!("foreign key {}: column count mismatch", fk.name));
            }
        }
        let mut unique_names = HashSet::new();
        for u in &self.uniques {
            if !unique_names.insert(u.name.as_str()) {
                out.push(format!("duplicate unique constraint {}", u.name));
            }
            for c in &u.columns {
                if self.column(c).is_none() {
                    out.push(format!("unique {}: column {c} does not exist", u.name));
                }
            }
        }
        out
    }
}

impl Column {
    pub fn verify(&self) -> Vec<String> {
        let mut out = self.logical_type.verify();
        let pea = self.origin == ColumnOrigin::PeaAttribute;
        if pea && !self.nullable {
            out.push("PEA column must be nullable".to_string());
        }
        if pea != self.pea_fk_group.is_some() {
            out.push("peaFkGroup set iff the column carries a PEA attribute".to_string());
        }
        out
    }
}

impl LogicalModel {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn verify(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut names = HashSet::new();
        for t in &self.tables {
            if !names.insert(t.name.as_str()) {
                out.push(format!("duplicate table {}", t.name));
            }
            out.extend(t.verify().into_iter().map(|v| format!("table {}: {v}", t.name)));
            for fk in &t.foreign_keys {
                let Some(target) = self.table(&fk.referenced_table) else {
                    out.push(format!(
                        "table {}: foreign key {} references unknown table {}",
                        t.name, fk.name, fk.referenced_table
                    ));
                    continue;
                };
                if fk.referenced_columns.as_slice() != target.natural_key()
                    && fk.referenced_columns != target.primary_key
                {
                    out.push(format!(
                        "table {}: foreign key {} does not reference a key of {}",
                        t.name, fk.name, target.name
                    ));
                }
                for (own, theirs) in fk.columns.iter().zip(&fk.referenced_columns) {
                    if let (Some(a), Some(b)) = (t.column(own), target.column(theirs)) {
                        if a.sql_type != b.sql_type {
                            out.push(format!(
                                "table {}: foreign key column {own} type {} differs from {}.{theirs} {}",
                                t.name, a.sql_type, target.name, b.sql_type
                            ));
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::types::BaseType;

    fn col(name: &str, nullable: bool) -> Column {
        Column {
            name: name.into(),
            logical_type: W3CType::new(BaseType::Integer),
            sql_type: NeutralType::Integer,
            nullable,
            origin: ColumnOrigin::OwnAttribute,
            frozen: false,
            uppercase: false,
            init: None,
            pea_fk_group: None,
            mandatory_when_linked: false,
        }
    }

    fn table() -> Table {
        Table {
            name: "T".into(),
            abbrev: "T".into(),
            columns: vec![col("a", false), col("b", true)],
            primary_key: vec!["a".into()],
            foreign_keys: vec![],
            uniques: vec![],
            journaled: false,
        }
    }

    #[test]
    fn valid_table_verifies() {
        assert!(table().verify().is_empty());
    }

    #[test]
    fn nullable_pk_column_is_reported() {
        let mut t = table();
        t.primary_key = vec!["b".into()];
        assert_eq!(t.verify(), vec!["primary key column b is nullable"]);
    }

    #[test]
    fn pea_column_must_be_nullable_and_grouped() {
        let mut c = col("x", false);
        c.origin = ColumnOrigin::PeaAttribute;
        assert_eq!(c.verify().len(), 2);
    }

    #[test]
    fn identifying_fk_outside_pk_is_reported() {
        let mut t = table();
        t.foreign_keys.push(ForeignKey {
            name: "FK".into(),
            columns: vec!["b".into()],
            referenced_table: "U".into(),
            referenced_columns: vec!["u".into()],
            identifying: true,
            nullable: true,
            on_delete: DeleteRule::Cascade,
        });
        let v = t.verify();
        assert!(v.iter().any(|m| m.contains("not in the primary key")));
        assert!(v.iter().any(|m| m.contains("is nullable")));
    }

    #[test]
    fn dangling_reference_is_reported() {
        let mut t = table();
        t.foreign_keys.push(ForeignKey {
            name: "FK".into(),
            columns: vec!["b".into()],
            referenced_table: "U".into(),
            referenced_columns: vec!["u".into()],
            identifying: false,
            nullable: true,
            on_delete: DeleteRule::Restrict,
        });
        let m = LogicalModel { name: "M".into(), tables: vec![t], trace_links: BTreeMap::new() };
        assert!(m.verify().iter().any(|v| v.contains("unknown table U")));
    }
}
