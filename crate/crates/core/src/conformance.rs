//! Semantic rule catalog applied to a parsed conceptual model.
//!
//! | rule | severity | condition |
//! |------|----------|-----------|
//! | R1 | Error | a «PK» association's parent end is not `1..1` |
//! | R2 | Error | the association is not of degree 1:n (parent max card `*`) |
//! | R3 | Error | an identifier closure is empty or cyclic over the «PK» graph |
//! | R4 | Error | «UID-i» indices of an entity are not contiguous from 1 |
//! | R5 | Error | `init=now()` on a type other than date or dateTime |
//! | R6 | Error | `{frozen}` on an identifier member |
//! | R7 | Error | an association attribute carries «UID-i» |
//! | R8 | Warning | «uppercase» on a non-string type |
//! | R9 | Error | «journaled» on an attribute |
//! | R10 | Error | derived table, abbreviation or column names collide |
//!
//! R1 is the rule shown by the original tool; the others follow from the
//! semantics the transformation relies on. «M» on an association
//! attribute is always legal and means "mandatory when the link exists".

use std::collections::HashMap;

use crate::model::{Attribute, Cardinality, ClosureError, ConceptualModel, Diagnostic, Entity, MaxCard, RuleId};
use crate::transform::{derived_column_names, KeyResolver, TransformMode};

/// Every rule violation, in model declaration order. Empty iff conformant.
pub fn check(model: &ConceptualModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let m = &model.name;

    for (idx, entity) in model.entities.iter().enumerate() {
        let path = format!("{m}/{}", entity.name);
        if let Some(d) = identifier_violation(model, idx, entity, &path) {
            out.push(d);
        }
        let indices = entity.uid_indices();
        if indices.iter().copied().ne(1..=indices.len() as u32) {
            let listed: Vec<String> = indices.iter().map(|i| format!("UID-{i}")).collect();
            out.push(Diagnostic::error(
                RuleId::R4,
                path.clone(),
                format!("identifier indices {} are not contiguous from UID-1", listed.join(", ")),
            ));
        }
        for attr in &entity.attributes {
            attribute_rules(attr, &format!("{path}/{}", attr.name), &mut out);
        }
    }

    for assoc in &model.associations {
        let path = format!("{m}/{}", assoc.name);
        if assoc.identifying && assoc.parent.cardinality != Cardinality::ONE_ONE {
            out.push(Diagnostic::error(
                RuleId::R1,
                format!("{path}/parent"),
                format!(
                    "identifying association must refer to exactly one parent {} (cardinality 1..1, found {})",
                    assoc.parent.entity, assoc.parent.cardinality
                ),
            ));
        }
        if assoc.parent.cardinality.max == MaxCard::Many {
            out.push(Diagnostic::error(
                RuleId::R2,
                format!("{path}/parent"),
                format!(
                    "association must be of degree 1:n, parent cardinality {} allows many",
                    assoc.parent.cardinality
                ),
            ));
        }
        for attr in &assoc.pea_attributes {
            let apath = format!("{path}/{}", attr.name);
            if let Some(i) = attr.uid_index {
                out.push(Diagnostic::error(
                    RuleId::R7,
                    apath.clone(),
                    format!("association attribute cannot be identifier member «UID-{i}»"),
                ));
            }
            attribute_rules(attr, &apath, &mut out);
        }
    }

    out.extend(name_collisions(model));
    out
}

fn attribute_rules(attr: &Attribute, path: &str, out: &mut Vec<Diagnostic>) {
    if attr.init.is_some() && !attr.data_type.base.is_temporal() {
        out.push(Diagnostic::error(
            RuleId::R5,
            path,
            format!("init=now() requires date or dateTime, found {}", attr.data_type),
        ));
    }
    if attr.frozen && attr.uid_index.is_some() {
        out.push(Diagnostic::error(RuleId::R6, path, "identifier members cannot be {frozen}"));
    }
    if attr.uppercase && !attr.data_type.base.is_string_family() {
        out.push(Diagnostic::warning(
            RuleId::R8,
            path,
            format!("«uppercase» ignored on non-string type {}", attr.data_type),
        ));
    }
    if attr.journaled {
        out.push(Diagnostic::error(RuleId::R9, path, "«journaled» applies to entities or the model, not attributes"));
    }
}

/// R3, reported once: at the entity without identifier, or at the first
/// declared entity of an identification cycle. A missing «UID-1» next to
/// other indices is left to R4.
fn identifier_violation(model: &ConceptualModel, idx: usize, entity: &Entity, path: &str) -> Option<Diagnostic> {
    let message = match crate::model::identifier_closure(model, &entity.name) {
        Ok(_) | Err(ClosureError::UnknownEntity(_)) => return None,
        Err(ClosureError::NoIdentifier(e)) if e == entity.name && entity.uid_indices().is_empty() => {
            "entity has neither «UID-1» attribute nor identifying parent".to_string()
        }
        Err(ClosureError::NoIdentifier(_)) => return None,
        Err(ClosureError::CyclicIdentification(cycle)) => {
            let members = &cycle[..cycle.len() - 1];
            let first = members.iter().filter_map(|n| model.entities.iter().position(|e| &e.name == n)).min();
            if first != Some(idx) {
                return None;
            }
            format!("identifying associations form a cycle: {}", cycle.join(" -> "))
        }
    };
    Some(Diagnostic::error(RuleId::R3, path, message))
}

fn name_collisions(model: &ConceptualModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let m = &model.name;
    let mut tables: HashMap<String, &str> = HashMap::new();
    let mut abbrevs: HashMap<String, &str> = HashMap::new();
    let mut keys = KeyResolver::new(model);

    for entity in &model.entities {
        let path = format!("{m}/{}", entity.name);
        let table = entity.table_name();
        if let Some(prev) = tables.insert(table.to_lowercase(), &entity.name) {
            out.push(Diagnostic::error(
                RuleId::R10,
                path.clone(),
                format!("table name {table} already used by entity {prev}"),
            ));
        }
        if let Some(prev) = abbrevs.insert(entity.abbrev.to_lowercase(), &entity.name) {
            out.push(Diagnostic::error(
                RuleId::R10,
                path.clone(),
                format!("abbreviation {} already used by entity {prev}", entity.abbrev),
            ));
        }
        // Surrogate `id` only appears in non-identifying mode; that name set
        // is a superset of the identifying one.
        let Some(columns) = derived_column_names(model, &mut keys, entity, TransformMode::NonIdentifying) else {
            continue;
        };
        let mut seen: HashMap<String, ()> = HashMap::new();
        for (name, origin) in columns {
            if seen.insert(name.to_lowercase(), ()).is_some() {
                out.push(Diagnostic::error(
                    RuleId::R10,
                    format!("{path}/{name}"),
                    format!("derived {} column {name} collides in table {table}", origin.keyword()),
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BaseType, Severity, W3CType};

    fn exam() -> ConceptualModel {
        crate::parser::parse(include_str!("../../../models/examens.mcd")).unwrap()
    }

    #[test]
    fn exam_model_is_conformant() {
        assert_eq!(check(&exam()), vec![]);
    }

    #[test]
    fn r1_on_optional_parent() {
        let mut m = exam();
        let a = m.associations.iter_mut().find(|a| a.name == "evaluer").unwrap();
        a.parent.cardinality = Cardinality::ZERO_ONE;
        let d = check(&m);
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].rule, RuleId::R1);
        assert_eq!(d[0].location, "Examens/evaluer/parent");
    }

    #[test]
    fn r4_gap() {
        let mut m = ConceptualModel::new("M");
        m.entities.push(
            Entity::new("A")
                .with_attribute(Attribute::new("k", W3CType::new(BaseType::Integer)).uid(1))
                .with_attribute(Attribute::new("x", W3CType::new(BaseType::Integer)).uid(3)),
        );
        let d = check(&m);
        assert_eq!(d.iter().map(|d| d.rule).collect::<Vec<_>>(), vec![RuleId::R4]);
    }

    #[test]
    fn r8_is_a_warning() {
        let mut m = ConceptualModel::new("M");
        m.entities.push(
            Entity::new("A").with_attribute(Attribute::new("k", W3CType::new(BaseType::Integer)).uid(1).uppercase()),
        );
        let d = check(&m);
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].rule, d[0].severity), (RuleId::R8, Severity::Warning));
    }
}
