use std::fmt;

use serde::Serialize;

use super::conceptual::InitExpr;
use super::logical::{Column, ForeignKey, Table, UniqueConstraint};
use super::physical::{PhysicalModel, TriggerSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ChangeKind {
    CreateTable,
    DropTable,
    AddColumn,
    DropColumn,
    AlterColumnType,
    AlterNullability,
    AddConstraint,
    DropConstraint,
    CreateTrigger,
    ReplaceTrigger,
    DropTrigger,
    CreateJournalTable,
}

impl fmt::Display for ChangeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Classification {
    /// Cannot alter or lose existing data.
    Preserved,
    /// May alter or lose existing data; needs operator opt-in.
    Forced,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Preserved => "PRESERVED",
            Classification::Forced => "FORCED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Constraint {
    PrimaryKey { name: String, columns: Vec<String> },
    ForeignKey(ForeignKey),
    Unique(UniqueConstraint),
}

impl Constraint {
    pub fn name(&self) -> &str {
        match self {
            Constraint::PrimaryKey { name, .. } => name,
            Constraint::ForeignKey(fk) => &fk.name,
            Constraint::Unique(u) => &u.name,
        }
    }

    pub fn primary_key(table: &Table) -> Option<Constraint> {
        (!table.primary_key.is_empty())
            .then(|| Constraint::PrimaryKey { name: table.primary_key_name(), columns: table.primary_key.clone() })
    }

    /// Every constraint of a table: primary key, uniques, foreign keys.
    pub fn of_table(table: &Table) -> Vec<Constraint> {
        let mut out: Vec<Constraint> = Constraint::primary_key(table).into_iter().collect();
        out.extend(table.uniques.iter().cloned().map(Constraint::Unique));
        out.extend(table.foreign_keys.iter().cloned().map(Constraint::ForeignKey));
        out
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::PrimaryKey { columns, .. } => write!(f, "PRIMARY KEY ({})", columns.join(", ")),
            Constraint::Unique(u) => write!(f, "UNIQUE ({})", u.columns.join(", ")),
            Constraint::ForeignKey(fk) => write!(
                f,
                "FOREIGN KEY ({}) REFERENCES {} ({})",
                fk.columns.join(", "),
                fk.referenced_table,
                fk.referenced_columns.join(", ")
            ),
        }
    }
}

/// Before/after state of the element a change item touches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Snapshot {
    Table(Table),
    Column(Column),
    Constraint(Constraint),
    Trigger(TriggerSpec),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChangeItem {
    pub kind: ChangeKind,
    /// `Table`, `Table.column`, `Table.constraint` or `Table.trigger`.
    pub path: String,
    pub classification: Classification,
    pub before: Option<Snapshot>,
    pub after: Option<Snapshot>,
}

impl ChangeItem {
    /// Table the item belongs to.
    pub fn table(&self) -> &str {
        self.path.split('.').next().unwrap_or(&self.path)
    }

    pub fn detail(&self) -> String {
        fn column_spec(c: &Column) -> String {
            match c.init {
                Some(InitExpr::Now) => format!("{} init=now()", c.sql_type),
                None => c.sql_type.to_string(),
            }
        }
        fn null_spec(c: &Column) -> &'static str {
            if c.nullable {
                "NULL"
            } else {
                "NOT NULL"
            }
        }
        match (self.kind, &self.before, &self.after) {
            (ChangeKind::AlterColumnType, Some(Snapshot::Column(b)), Some(Snapshot::Column(a))) => {
                format!("{} -> {}", column_spec(b), column_spec(a))
            }
            (ChangeKind::AlterNullability, Some(Snapshot::Column(b)), Some(Snapshot::Column(a))) => {
                format!("{} -> {}", null_spec(b), null_spec(a))
            }
            (_, _, Some(Snapshot::Column(c))) | (_, Some(Snapshot::Column(c)), None) => {
                format!("{} {}", column_spec(c), null_spec(c))
            }
            (_, _, Some(Snapshot::Table(t))) | (_, Some(Snapshot::Table(t)), None) => {
                format!("columns={}", t.columns.len())
            }
            (_, _, Some(Snapshot::Constraint(c))) | (_, Some(Snapshot::Constraint(c)), None) => c.to_string(),
            (_, _, Some(Snapshot::Trigger(t))) | (_, Some(Snapshot::Trigger(t)), None) => {
                format!("BEFORE {}", t.event.sql_keyword())
            }
            _ => String::new(),
        }
    }
}

/// `<PRESERVED|FORCED> <kind> <path> <detail>`
impl fmt::Display for ChangeItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.classification, self.kind, self.path)?;
        let detail = self.detail();
        if !detail.is_empty() {
            write!(f, " {detail}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MigrationPlan {
    pub items: Vec<ChangeItem>,
    /// Model the plan migrates to; table APIs are regenerated from it.
    #[serde(skip)]
    pub target: PhysicalModel,
}

impl MigrationPlan {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn forced(&self) -> impl Iterator<Item = &ChangeItem> {
        self.items.iter().filter(|i| i.classification == Classification::Forced)
    }

    pub fn has_forced(&self) -> bool {
        self.forced().next().is_some()
    }

    /// Ordering check: a table is created before any constraint or column
    /// referring to it is added, and every drop of a table comes after the
    /// drops of the constraints referencing it.
    pub fn verify(&self) -> Vec<String> {
        let mut out = Vec::new();
        let position =
            |kind: ChangeKind, table: &str| self.items.iter().position(|i| i.kind == kind && i.table() == table);
        for (idx, item) in self.items.iter().enumerate() {
            if let (ChangeKind::AddConstraint, Some(Snapshot::Constraint(Constraint::ForeignKey(fk)))) =
                (item.kind, &item.after)
            {
                if let Some(created) = position(ChangeKind::CreateTable, &fk.referenced_table) {
                    if created > idx {
                        out.push(format!("{} added before table {} is created", item.path, fk.referenced_table));
                    }
                }
            }
            if let (ChangeKind::DropConstraint, Some(Snapshot::Constraint(Constraint::ForeignKey(fk)))) =
                (item.kind, &item.before)
            {
                if let Some(dropped) = position(ChangeKind::DropTable, &fk.referenced_table) {
                    if dropped < idx {
                        out.push(format!("table {} dropped before dependent {}", fk.referenced_table, item.path));
                    }
                }
            }
            if matches!(item.kind, ChangeKind::AddColumn | ChangeKind::AddConstraint) {
                if let Some(created) = position(ChangeKind::CreateTable, item.table()) {
                    if created > idx {
                        out.push(format!("{} precedes creation of its table", item.path));
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for MigrationPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            writeln!(f, "{item}")?;
        }
        Ok(())
    }
}
