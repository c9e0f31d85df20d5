//! Natural identifier of an entity: identifying («PK») parents' keys,
//! recursively expanded, followed by the local «UID-1» attributes.

use serde::Serialize;
use thiserror::Error;

use super::conceptual::ConceptualModel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum IdentifierPart {
    LocalAttribute(String),
    PropagatedKey { association: String, parent: String, parts: Vec<IdentifierPart> },
}

impl IdentifierPart {
    /// Number of leaf attributes under this part.
    pub fn width(&self) -> usize {
        match self {
            IdentifierPart::LocalAttribute(_) => 1,
            IdentifierPart::PropagatedKey { parts, .. } => parts.iter().map(Self::width).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("unknown entity {0}")]
    UnknownEntity(String),
    #[error("identifying associations form a cycle: {}", .0.join(" -> "))]
    CyclicIdentification(Vec<String>),
    #[error("entity {0} has no identifier")]
    NoIdentifier(String),
}

/// Parts composing the natural identifier of `entity`.
///
/// Identifying parents come first, in association declaration order, then
/// the local «UID-1» attributes in declaration order.
pub fn identifier_closure(model: &ConceptualModel, entity: &str) -> Result<Vec<IdentifierPart>, ClosureError> {
    let mut stack = Vec::new();
    expand(model, entity, &mut stack)
}

fn expand(model: &ConceptualModel, entity: &str, stack: &mut Vec<String>) -> Result<Vec<IdentifierPart>, ClosureError> {
    if let Some(pos) = stack.iter().position(|e| e == entity) {
        let mut cycle = stack[pos..].to_vec();
        cycle.push(entity.to_string());
        return Err(ClosureError::CyclicIdentification(cycle));
    }
    let ent = model.entity(entity).ok_or_else(|| ClosureError::UnknownEntity(entity.to_string()))?;
    stack.push(entity.to_string());
    let mut parts = Vec::new();
    for assoc in model.child_associations(entity).filter(|a| a.identifying) {
        let parent_parts = expand(model, &assoc.parent.entity, stack)?;
        parts.push(IdentifierPart::PropagatedKey {
            association: assoc.name.clone(),
            parent: assoc.parent.entity.clone(),
            parts: parent_parts,
        });
    }
    stack.pop();
    parts.extend(ent.uid_members(1).map(|a| IdentifierPart::LocalAttribute(a.name.clone())));
    if parts.is_empty() {
        return Err(ClosureError::NoIdentifier(entity.to_string()));
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::conceptual::*;
    use crate::model::types::{BaseType, W3CType};

    fn pk_assoc(name: &str, parent: &str, child: &str) -> Association {
        Association {
            name: name.into(),
            identifying: true,
            parent: AssociationEnd { entity: parent.into(), role: name.into(), cardinality: Cardinality::ONE_ONE },
            child: AssociationEnd {
                entity: child.into(),
                role: child.to_lowercase(),
                cardinality: Cardinality::ZERO_MANY,
            },
            pea_attributes: vec![],
        }
    }

    fn int(name: &str) -> Attribute {
        Attribute::new(name, W3CType::new(BaseType::Integer))
    }

    #[test]
    fn single_entity_identity() {
        let mut m = ConceptualModel::new("M");
        m.entities.push(Entity::new("A").with_attribute(int("a").uid(1).mandatory()));
        assert_eq!(identifier_closure(&m, "A").unwrap(), vec![IdentifierPart::LocalAttribute("a".into())]);
    }

    #[test]
    fn chain_expands_recursively() {
        let mut m = ConceptualModel::new("M");
        m.entities.push(Entity::new("A").with_attribute(int("a").uid(1)));
        m.entities.push(Entity::new("B"));
        m.entities.push(Entity::new("C").with_attribute(int("c").uid(1)));
        m.associations.push(pk_assoc("ab", "A", "B"));
        m.associations.push(pk_assoc("bc", "B", "C"));
        let c = identifier_closure(&m, "C").unwrap();
        assert_eq!(
            c,
            vec![
                IdentifierPart::PropagatedKey {
                    association: "bc".into(),
                    parent: "B".into(),
                    parts: vec![IdentifierPart::PropagatedKey {
                        association: "ab".into(),
                        parent: "A".into(),
                        parts: vec![IdentifierPart::LocalAttribute("a".into())],
                    }],
                },
                IdentifierPart::LocalAttribute("c".into()),
            ]
        );
        assert_eq!(c.iter().map(IdentifierPart::width).sum::<usize>(), 2);
    }

    #[test]
    fn cycle_is_reported() {
        let mut m = ConceptualModel::new("M");
        m.entities.push(Entity::new("A").with_attribute(int("a").uid(1)));
        m.entities.push(Entity::new("B").with_attribute(int("b").uid(1)));
        m.associations.push(pk_assoc("ab", "A", "B"));
        m.associations.push(pk_assoc("ba", "B", "A"));
        match identifier_closure(&m, "A") {
            Err(ClosureError::CyclicIdentification(path)) => {
                assert_eq!(path, vec!["A", "B", "A"]);
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn empty_identifier_is_reported() {
        let mut m = ConceptualModel::new("M");
        m.entities.push(Entity::new("A").with_attribute(int("a")));
        assert_eq!(identifier_closure(&m, "A"), Err(ClosureError::NoIdentifier("A".into())));
    }
}
