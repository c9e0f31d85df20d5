//! Conceptual → relational logical transformation.
//!
//! Entities become tables; pseudo-associative entity (PEA) attributes are
//! dissolved into nullable columns of the child table; «PK» associations
//! either propagate the parent key into the child primary key
//! ([`TransformMode::Identifying`]) or become plain mandatory foreign keys
//! with the natural identifier restated as a `UID1_<abbrev>` unique
//! constraint and a surrogate `id` primary key
//! ([`TransformMode::NonIdentifying`]).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::conformance;
use crate::model::conceptual::pea_column_name;
use crate::model::types::{DEFAULT_NUMERIC_PRECISION, DEFAULT_TEXT_LENGTH};
use crate::model::{
    identifier_closure, Association, BaseType, ClosureError, Column, ColumnOrigin, ConceptId, ConceptualModel,
    DeleteRule, Diagnostic, Entity, ForeignKey, IdentifierPart, LogicalId, LogicalModel, MinCard, NeutralType, Table,
    UniqueConstraint, W3CType,
};

pub const SURROGATE_COLUMN: &str = "id";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub enum TransformMode {
    #[default]
    Identifying,
    NonIdentifying,
}

impl fmt::Display for TransformMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformMode::Identifying => "identifying",
            TransformMode::NonIdentifying => "non-identifying",
        })
    }
}

impl FromStr for TransformMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identifying" => Ok(TransformMode::Identifying),
            "non-identifying" => Ok(TransformMode::NonIdentifying),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("model is not conformant ({} error(s))", .0.len())]
    NotConformant(Vec<Diagnostic>),
    #[error("derived name `{name}` collides in {scope}")]
    NameCollision { scope: String, name: String },
    #[error(transparent)]
    Closure(#[from] ClosureError),
}

/// Neutral SQL category for a W3C datatype. `word`/`token` refinements
/// are not representable in DDL and are left to the table API.
pub fn map_type(t: &W3CType) -> NeutralType {
    match t.base {
        BaseType::String | BaseType::Token | BaseType::Word => {
            NeutralType::Text(t.length.unwrap_or(DEFAULT_TEXT_LENGTH))
        }
        BaseType::Integer => NeutralType::Integer,
        BaseType::Decimal => {
            NeutralType::Numeric(t.precision.unwrap_or(DEFAULT_NUMERIC_PRECISION), t.scale.unwrap_or(0))
        }
        BaseType::Boolean => NeutralType::Boolean,
        BaseType::Date => NeutralType::Date,
        BaseType::DateTime => NeutralType::Timestamp,
        BaseType::Duration => NeutralType::Interval,
    }
}

/// `<parent.abbrev>_<role>_<parentPkColumn>`
pub fn derive_fk_column_name(parent: &Entity, role: &str, parent_pk_column: &str) -> String {
    format!("{}_{role}_{parent_pk_column}", parent.abbrev)
}

pub fn foreign_key_name(child: &Entity, parent: &Entity, role: &str) -> String {
    format!("FK_{}_{}_{role}", child.abbrev, parent.abbrev)
}

pub fn unique_name(index: u32, abbrev: &str) -> String {
    format!("UID{index}_{abbrev}")
}

/// A column of an entity's natural key, in identifier-closure order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyColumn {
    pub name: String,
    pub logical_type: W3CType,
}

/// Natural-key columns per entity, memoized over the «PK» graph.
pub struct KeyResolver<'m> {
    model: &'m ConceptualModel,
    cache: HashMap<String, Result<Vec<KeyColumn>, ClosureError>>,
}

impl<'m> KeyResolver<'m> {
    pub fn new(model: &'m ConceptualModel) -> Self {
        KeyResolver { model, cache: HashMap::new() }
    }

    /// Columns of the natural identifier, named as they appear in the
    /// entity's own table.
    pub fn natural_key(&mut self, entity: &str) -> Result<Vec<KeyColumn>, ClosureError> {
        if let Some(hit) = self.cache.get(entity) {
            return hit.clone();
        }
        let result = identifier_closure(self.model, entity).and_then(|parts| {
            let ent = self.model.entity(entity).ok_or_else(|| ClosureError::UnknownEntity(entity.to_string()))?;
            let mut cols = Vec::new();
            for part in parts {
                match part {
                    IdentifierPart::LocalAttribute(name) => {
                        let attr = ent.attribute(&name).expect("closure names local attributes");
                        cols.push(KeyColumn { name, logical_type: attr.data_type.clone() });
                    }
                    IdentifierPart::PropagatedKey { association, .. } => {
                        let assoc = self.model.association(&association).expect("closure names associations");
                        cols.extend(self.fk_columns(assoc)?);
                    }
                }
            }
            Ok(cols)
        });
        self.cache.insert(entity.to_string(), result.clone());
        result
    }

    /// Columns an association contributes to its child table.
    pub fn fk_columns(&mut self, assoc: &Association) -> Result<Vec<KeyColumn>, ClosureError> {
        let parent = self
            .model
            .entity(&assoc.parent.entity)
            .ok_or_else(|| ClosureError::UnknownEntity(assoc.parent.entity.clone()))?;
        Ok(self
            .natural_key(&parent.name)?
            .into_iter()
            .map(|k| KeyColumn {
                name: derive_fk_column_name(parent, &assoc.parent.role, &k.name),
                logical_type: k.logical_type,
            })
            .collect())
    }
}

/// Column names the transformation derives for `entity`, in table order,
/// without building the table. `None` when the identifier of a parent
/// cannot be resolved.
pub fn derived_column_names(
    model: &ConceptualModel,
    keys: &mut KeyResolver<'_>,
    entity: &Entity,
    mode: TransformMode,
) -> Option<Vec<(String, ColumnOrigin)>> {
    let mut out = Vec::new();
    let has_identifying_parent = model.child_associations(&entity.name).any(|a| a.identifying);
    if mode == TransformMode::NonIdentifying && has_identifying_parent {
        out.push((SURROGATE_COLUMN.to_string(), ColumnOrigin::Surrogate));
    }
    for a in model.child_associations(&entity.name).filter(|a| a.identifying) {
        for k in keys.fk_columns(a).ok()? {
            out.push((k.name, ColumnOrigin::ForeignKey));
        }
    }
    for a in &entity.attributes {
        out.push((a.name.clone(), ColumnOrigin::OwnAttribute));
    }
    for a in model.child_associations(&entity.name) {
        if !a.identifying {
            for k in keys.fk_columns(a).ok()? {
                out.push((k.name, ColumnOrigin::ForeignKey));
            }
        }
        for p in &a.pea_attributes {
            out.push((pea_column_name(&a.parent.role, &p.name), ColumnOrigin::PeaAttribute));
        }
    }
    Some(out)
}

pub fn transform(model: &ConceptualModel, mode: TransformMode) -> Result<LogicalModel, TransformError> {
    let errors: Vec<Diagnostic> = conformance::check(model).into_iter().filter(Diagnostic::is_error).collect();
    if !errors.is_empty() {
        return Err(TransformError::NotConformant(errors));
    }

    let mut keys = KeyResolver::new(model);
    let mut tables = Vec::new();
    let mut trace = BTreeMap::new();
    for entity in &model.entities {
        let table = build_table(model, &mut keys, entity, mode, &mut trace)?;
        tables.push(table);
    }

    let mut seen = HashSet::new();
    for t in &tables {
        if !seen.insert(t.name.to_lowercase()) {
            return Err(TransformError::NameCollision { scope: "model".into(), name: t.name.clone() });
        }
    }

    Ok(LogicalModel { name: model.name.clone(), tables, trace_links: trace })
}

fn build_table(
    model: &ConceptualModel,
    keys: &mut KeyResolver<'_>,
    entity: &Entity,
    mode: TransformMode,
    trace: &mut BTreeMap<ConceptId, LogicalId>,
) -> Result<Table, TransformError> {
    let table_name = entity.table_name();
    let natural_key: Vec<String> = keys.natural_key(&entity.name)?.into_iter().map(|k| k.name).collect();
    let has_identifying_parent = model.child_associations(&entity.name).any(|a| a.identifying);
    let surrogate = mode == TransformMode::NonIdentifying && has_identifying_parent;

    let mut columns = Vec::new();
    let mut foreign_keys = Vec::new();

    if surrogate {
        columns.push(Column {
            name: SURROGATE_COLUMN.to_string(),
            logical_type: W3CType::new(BaseType::Integer),
            sql_type: NeutralType::Integer,
            nullable: false,
            origin: ColumnOrigin::Surrogate,
            frozen: false,
            uppercase: false,
            init: None,
            pea_fk_group: None,
            mandatory_when_linked: false,
        });
    }

    let fk_column = |k: KeyColumn, nullable: bool| Column {
        sql_type: map_type(&k.logical_type),
        name: k.name,
        logical_type: k.logical_type,
        nullable,
        origin: ColumnOrigin::ForeignKey,
        frozen: false,
        uppercase: false,
        init: None,
        pea_fk_group: None,
        mandatory_when_linked: false,
    };

    let mut fk_for = |assoc: &Association,
                      columns: &mut Vec<Column>,
                      trace: &mut BTreeMap<ConceptId, LogicalId>|
     -> Result<String, TransformError> {
        let parent = model
            .entity(&assoc.parent.entity)
            .ok_or_else(|| ClosureError::UnknownEntity(assoc.parent.entity.clone()))?;
        let nullable = !assoc.identifying && assoc.parent.cardinality.min == MinCard::Zero;
        let cols = keys.fk_columns(assoc)?;
        let referenced: Vec<String> = keys.natural_key(&parent.name)?.into_iter().map(|k| k.name).collect();
        let name = foreign_key_name(entity, parent, &assoc.parent.role);
        let fk = ForeignKey {
            name: name.clone(),
            columns: cols.iter().map(|k| k.name.clone()).collect(),
            referenced_table: parent.table_name(),
            referenced_columns: referenced,
            identifying: assoc.identifying && mode == TransformMode::Identifying,
            nullable,
            on_delete: if assoc.identifying { DeleteRule::Cascade } else { DeleteRule::Restrict },
        };
        columns.extend(cols.into_iter().map(|k| fk_column(k, nullable)));
        trace.insert(
            ConceptId::Association(assoc.name.clone()),
            LogicalId::ForeignKey { table: table_name.clone(), name: name.clone() },
        );
        foreign_keys.push(fk);
        Ok(name)
    };

    let mut fk_names = HashMap::new();
    for assoc in model.child_associations(&entity.name).filter(|a| a.identifying) {
        let name = fk_for(assoc, &mut columns, trace)?;
        fk_names.insert(assoc.name.clone(), name);
    }

    for attr in &entity.attributes {
        columns.push(Column {
            name: attr.name.clone(),
            logical_type: attr.data_type.clone(),
            sql_type: map_type(&attr.data_type),
            nullable: !(attr.mandatory || attr.uid_index == Some(1)),
            origin: ColumnOrigin::OwnAttribute,
            frozen: attr.frozen,
            uppercase: attr.uppercase,
            init: attr.init,
            pea_fk_group: None,
            mandatory_when_linked: false,
        });
        trace.insert(
            ConceptId::Attribute { entity: entity.name.clone(), attribute: attr.name.clone() },
            LogicalId::Column { table: table_name.clone(), column: attr.name.clone() },
        );
    }

    for assoc in model.child_associations(&entity.name) {
        let group = match fk_names.get(&assoc.name) {
            Some(name) => name.clone(),
            None => fk_for(assoc, &mut columns, trace)?,
        };
        for p in &assoc.pea_attributes {
            let name = pea_column_name(&assoc.parent.role, &p.name);
            columns.push(Column {
                name: name.clone(),
                logical_type: p.data_type.clone(),
                sql_type: map_type(&p.data_type),
                nullable: true,
                origin: ColumnOrigin::PeaAttribute,
                frozen: p.frozen,
                uppercase: p.uppercase,
                init: p.init,
                pea_fk_group: Some(group.clone()),
                mandatory_when_linked: p.mandatory,
            });
            trace.insert(
                ConceptId::PeaAttribute { association: assoc.name.clone(), attribute: p.name.clone() },
                LogicalId::Column { table: table_name.clone(), column: name },
            );
        }
    }

    let mut seen = HashSet::new();
    for c in &columns {
        if !seen.insert(c.name.to_lowercase()) {
            return Err(TransformError::NameCollision { scope: format!("table {table_name}"), name: c.name.clone() });
        }
    }

    let mut uniques = Vec::new();
    let primary_key = if surrogate {
        uniques.push(UniqueConstraint { name: unique_name(1, &entity.abbrev), columns: natural_key });
        vec![SURROGATE_COLUMN.to_string()]
    } else {
        natural_key
    };
    for index in entity.uid_indices().into_iter().filter(|i| *i > 1) {
        uniques.push(UniqueConstraint {
            name: unique_name(index, &entity.abbrev),
            columns: entity.uid_members(index).map(|a| a.name.clone()).collect(),
        });
    }

    trace.insert(ConceptId::Entity(entity.name.clone()), LogicalId::Table(table_name.clone()));

    Ok(Table {
        name: table_name,
        abbrev: entity.abbrev.clone(),
        columns,
        primary_key,
        foreign_keys,
        uniques,
        journaled: model.is_journaled(entity),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AssociationEnd, Attribute, Cardinality};

    #[test]
    fn type_mapping() {
        assert_eq!(map_type(&W3CType::new(BaseType::Word)), NeutralType::Text(255));
        assert_eq!(map_type(&W3CType::with_length(BaseType::Token, 40)), NeutralType::Text(40));
        assert_eq!(map_type(&W3CType::new(BaseType::Integer)), NeutralType::Integer);
        assert_eq!(map_type(&W3CType::decimal(7, 2)), NeutralType::Numeric(7, 2));
        assert_eq!(map_type(&W3CType::new(BaseType::DateTime)), NeutralType::Timestamp);
        assert_eq!(map_type(&W3CType::new(BaseType::Duration)), NeutralType::Interval);
        assert_eq!(map_type(&W3CType::new(BaseType::Date)), NeutralType::Date);
        assert_eq!(map_type(&W3CType::new(BaseType::Boolean)), NeutralType::Boolean);
    }

    #[test]
    fn fk_column_names() {
        assert_eq!(derive_fk_column_name(&Entity::new("Matiere"), "evaluer", "num"), "Mat_evaluer_num");
        assert_eq!(derive_fk_column_name(&Entity::new("Professeur"), "dirige", "mnemo"), "Pro_dirige_mnemo");
        assert_eq!(derive_fk_column_name(&Entity::new("X"), "r", "k"), "X_r_k");
    }

    fn single_entity_model() -> ConceptualModel {
        let mut m = ConceptualModel::new("M");
        m.entities.push(
            Entity::new("Pays")
                .with_attribute(Attribute::new("code", W3CType::with_length(BaseType::Word, 2)).uid(1).mandatory())
                .with_attribute(Attribute::new("nom", W3CType::new(BaseType::Token))),
        );
        m
    }

    #[test]
    fn association_free_model_is_mode_independent() {
        let m = single_entity_model();
        let a = transform(&m, TransformMode::Identifying).unwrap();
        let b = transform(&m, TransformMode::NonIdentifying).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tables[0].primary_key, vec!["code"]);
        assert!(!a.tables[0].has_surrogate());
    }

    #[test]
    fn non_conformant_model_is_refused() {
        let mut m = single_entity_model();
        m.entities[0].attributes[0].uid_index = Some(2);
        assert!(matches!(transform(&m, TransformMode::Identifying), Err(TransformError::NotConformant(_))));
    }

    #[test]
    fn multi_parent_identifying_entity_orders_parents_by_declaration() {
        let mut m = ConceptualModel::new("M");
        for (e, k) in [("Etudiant", "matricule"), ("Cours", "sigle")] {
            m.entities.push(
                Entity::new(e).with_attribute(Attribute::new(k, W3CType::new(BaseType::Word)).uid(1).mandatory()),
            );
        }
        m.entities.push(Entity::new("Inscription").with_attribute(Attribute::new("note", W3CType::decimal(3, 1))));
        for (name, parent) in [("inscrit", "Etudiant"), ("suit", "Cours")] {
            m.associations.push(Association {
                name: name.into(),
                identifying: true,
                parent: AssociationEnd { entity: parent.into(), role: name.into(), cardinality: Cardinality::ONE_ONE },
                child: AssociationEnd {
                    entity: "Inscription".into(),
                    role: "inscription".into(),
                    cardinality: Cardinality::ZERO_MANY,
                },
                pea_attributes: vec![],
            });
        }
        let lm = transform(&m, TransformMode::Identifying).unwrap();
        let t = lm.table("Inscriptions").unwrap();
        assert_eq!(t.primary_key, vec!["Etu_inscrit_matricule", "Cou_suit_sigle"]);
        assert!(lm.verify().is_empty(), "{:?}", lm.verify());

        let lm = transform(&m, TransformMode::NonIdentifying).unwrap();
        let t = lm.table("Inscriptions").unwrap();
        assert_eq!(t.primary_key, vec!["id"]);
        assert_eq!(t.uniques[0].columns, vec!["Etu_inscrit_matricule", "Cou_suit_sigle"]);
        assert!(lm.verify().is_empty(), "{:?}", lm.verify());
    }
}
