//! Table APIs: per-table trigger and procedure specifications enforcing
//! what the relational structure cannot (frozen columns, `word`/`token`
//! refinements, uppercase normalization, PEA coupling, default values),
//! plus journal tables.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::physical::{
    expected_calls, journal_table_name, trigger_name, CHECKTYPE_ERROR_CODE, CHECKTYPE_MESSAGE_KEY,
    CHECKTYPE_MESSAGE_TEXT, FROZEN_ERROR_CODE, FROZEN_MESSAGE_KEY, FROZEN_MESSAGE_TEXT, PEA_ERROR_CODE,
    PEA_MESSAGE_KEY, PEA_MESSAGE_TEXT,
};
use crate::model::{
    BaseType, Column, ColumnOrigin, ConceptId, ConceptualModel, ErrorMessage, LogicalId, LogicalModel, NeutralType,
    PhysicalModel, ProcedureKind, ProcedureSpec, Table, TableApi, TriggerEvent, TriggerSpec, TriggerTiming, W3CType,
};

pub const JN_OPERATION: &str = "JN_OPERATION";
pub const JN_USER: &str = "JN_USER";
pub const JN_DATETIME: &str = "JN_DATETIME";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TapiError {
    #[error("logical element {0} has no conceptual origin")]
    TraceMismatch(String),
}

pub fn build_physical(logical: &LogicalModel, conceptual: &ConceptualModel) -> Result<PhysicalModel, TapiError> {
    check_trace(logical, conceptual)?;
    let mut table_apis = Vec::new();
    let mut journal_tables = Vec::new();
    for table in &logical.tables {
        if let Some(api) = table_api(table) {
            table_apis.push(api);
        }
        if table.journaled {
            journal_tables.push(journal_table(table));
        }
    }
    Ok(PhysicalModel { logical: logical.clone(), table_apis, journal_tables })
}

fn check_trace(logical: &LogicalModel, conceptual: &ConceptualModel) -> Result<(), TapiError> {
    let targets: BTreeSet<&LogicalId> = logical.trace_links.values().collect();
    for (concept, target) in &logical.trace_links {
        let known = match concept {
            ConceptId::Entity(e) => conceptual.entity(e).is_some(),
            ConceptId::Attribute { entity, attribute } => {
                conceptual.entity(entity).is_some_and(|e| e.attribute(attribute).is_some())
            }
            ConceptId::Association(a) => conceptual.association(a).is_some(),
            ConceptId::PeaAttribute { association, attribute } => conceptual
                .association(association)
                .is_some_and(|a| a.pea_attributes.iter().any(|p| &p.name == attribute)),
        };
        if !known {
            return Err(TapiError::TraceMismatch(format!("{target} (from {concept})")));
        }
    }
    for table in &logical.tables {
        let id = LogicalId::Table(table.name.clone());
        if !targets.contains(&id) {
            return Err(TapiError::TraceMismatch(id.to_string()));
        }
        for c in &table.columns {
            if matches!(c.origin, ColumnOrigin::OwnAttribute | ColumnOrigin::PeaAttribute) {
                let id = LogicalId::Column { table: table.name.clone(), column: c.name.clone() };
                if !targets.contains(&id) {
                    return Err(TapiError::TraceMismatch(id.to_string()));
                }
            }
        }
        for fk in &table.foreign_keys {
            let id = LogicalId::ForeignKey { table: table.name.clone(), name: fk.name.clone() };
            if !targets.contains(&id) {
                return Err(TapiError::TraceMismatch(id.to_string()));
            }
        }
    }
    Ok(())
}

/// Columns whose values a `word`/`token` refinement constrains.
pub fn refined(c: &Column) -> bool {
    matches!(c.origin, ColumnOrigin::OwnAttribute | ColumnOrigin::PeaAttribute)
        && c.logical_type.base.refinement().is_some()
}

pub fn uppercased(c: &Column) -> bool {
    c.uppercase && c.logical_type.base.is_string_family()
}

pub fn autogenerated(c: &Column) -> bool {
    c.init.is_some() || c.origin == ColumnOrigin::Surrogate
}

fn names(table: &Table, pred: impl Fn(&Column) -> bool) -> Vec<String> {
    table.columns.iter().filter(|c| pred(c)).map(|c| c.name.clone()).collect()
}

fn message(code: i32, key: &str, text: &str) -> Option<ErrorMessage> {
    Some(ErrorMessage { code, key: key.to_string(), text: text.to_string() })
}

/// Table API of `table`, or `None` when no procedure would be generated.
pub fn table_api(table: &Table) -> Option<TableApi> {
    let mut procedures = Vec::new();
    let mut push = |kind, target_columns: Vec<String>, error| {
        if !target_columns.is_empty() {
            procedures.push(ProcedureSpec { kind, target_columns, error });
        }
    };
    push(ProcedureKind::AutogenColumn, names(table, autogenerated), None);
    push(
        ProcedureKind::ChecktypeColumn,
        names(table, refined),
        message(CHECKTYPE_ERROR_CODE, CHECKTYPE_MESSAGE_KEY, CHECKTYPE_MESSAGE_TEXT),
    );
    push(ProcedureKind::UppercaseColumn, names(table, uppercased), None);
    push(
        ProcedureKind::ColumnPea,
        names(table, |c| c.origin == ColumnOrigin::PeaAttribute),
        message(PEA_ERROR_CODE, PEA_MESSAGE_KEY, PEA_MESSAGE_TEXT),
    );
    push(
        ProcedureKind::FrozenColumn,
        names(table, |c| c.frozen),
        message(FROZEN_ERROR_CODE, FROZEN_MESSAGE_KEY, FROZEN_MESSAGE_TEXT),
    );
    if table.journaled {
        push(ProcedureKind::JournalizeRow, names(table, |_| true), None);
    }
    if procedures.is_empty() {
        return None;
    }

    let mut events = vec![TriggerEvent::Insert, TriggerEvent::Update];
    if table.journaled {
        events.push(TriggerEvent::Delete);
    }
    let triggers = events
        .into_iter()
        .map(|event| TriggerSpec {
            name: trigger_name(&table.abbrev, event),
            event,
            timing: TriggerTiming::Before,
            procedure_calls: expected_calls(event, table.journaled),
        })
        .collect();
    Some(TableApi { table_name: table.name.clone(), abbrev: table.abbrev.clone(), triggers, procedures })
}

/// `JN_<table>`: the three bookkeeping columns followed by a nullable copy
/// of every source column. No keys or constraints.
pub fn journal_table(table: &Table) -> Table {
    let bookkeeping = |name: &str, logical_type: W3CType, sql_type| Column {
        name: name.to_string(),
        logical_type,
        sql_type,
        nullable: false,
        origin: ColumnOrigin::Journal,
        frozen: false,
        uppercase: false,
        init: None,
        pea_fk_group: None,
        mandatory_when_linked: false,
    };
    let mut columns = vec![
        bookkeeping(JN_OPERATION, W3CType::with_length(BaseType::String, 3), NeutralType::Text(3)),
        bookkeeping(JN_USER, W3CType::with_length(BaseType::String, 128), NeutralType::Text(128)),
        bookkeeping(JN_DATETIME, W3CType::new(BaseType::DateTime), NeutralType::Timestamp),
    ];
    columns.extend(table.columns.iter().map(|c| Column {
        nullable: true,
        origin: ColumnOrigin::Journal,
        frozen: false,
        uppercase: false,
        init: None,
        pea_fk_group: None,
        mandatory_when_linked: false,
        ..c.clone()
    }));
    Table {
        name: journal_table_name(&table.name),
        abbrev: format!("JN{}", table.abbrev),
        columns,
        primary_key: Vec::new(),
        foreign_keys: Vec::new(),
        uniques: Vec::new(),
        journaled: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{transform, TransformMode};

    fn exam() -> PhysicalModel {
        let m = crate::parser::parse(include_str!("../../../models/examens.mcd")).unwrap();
        let lm = transform(&m, TransformMode::Identifying).unwrap();
        build_physical(&lm, &m).unwrap()
    }

    #[test]
    fn exam_update_chain() {
        let pm = exam();
        let api = pm.table_api("Examens").unwrap();
        let bur = api.trigger(TriggerEvent::Update).unwrap();
        assert_eq!(bur.name, "Exa_TAPIs_BUR");
        let calls: Vec<_> = bur.procedure_calls.iter().map(|k| k.name()).collect();
        assert_eq!(
            calls,
            [
                "autogen_column_upd",
                "autogen_column",
                "checktype_column",
                "uppercase_column",
                "column_PEA",
                "frozen_column",
                "journalize_row"
            ]
        );
        let frozen = api.procedure(ProcedureKind::FrozenColumn).unwrap();
        assert_eq!(frozen.target_columns, ["dateCreation"]);
        assert_eq!(frozen.error.as_ref().unwrap().code, -20001);
        assert!(pm.verify().is_empty(), "{:?}", pm.verify());
    }

    #[test]
    fn journal_columns_follow_source() {
        let pm = exam();
        let jn = pm.journal_table("Matieres").unwrap();
        let cols: Vec<_> = jn.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(cols, ["JN_OPERATION", "JN_USER", "JN_DATETIME", "num", "code", "libelle"]);
        assert!(jn.primary_key.is_empty());
    }

    #[test]
    fn featureless_table_has_no_api() {
        let mut m = ConceptualModel::new("M");
        m.entities.push(
            crate::model::Entity::new("A")
                .with_attribute(crate::model::Attribute::new("k", W3CType::new(BaseType::Integer)).uid(1)),
        );
        let lm = transform(&m, TransformMode::Identifying).unwrap();
        assert!(build_physical(&lm, &m).unwrap().table_apis.is_empty());
    }

    #[test]
    fn broken_trace_is_rejected() {
        let m = crate::parser::parse(include_str!("../../../models/examens.mcd")).unwrap();
        let mut lm = transform(&m, TransformMode::Identifying).unwrap();
        lm.trace_links.retain(|k, _| !matches!(k, ConceptId::Entity(_)));
        assert!(matches!(build_physical(&lm, &m), Err(TapiError::TraceMismatch(_))));
    }
}
