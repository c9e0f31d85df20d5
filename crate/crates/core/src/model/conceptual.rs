//! Conceptual data model (MCD): entities, attributes and 1:n associations
//! enriched with the profile's stereotypes.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use super::types::W3CType;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConceptualModel {
    pub name: String,
    /// Journaling requested for every entity of the model.
    pub journaled: bool,
    pub entities: Vec<Entity>,
    pub associations: Vec<Association>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Entity {
    pub name: String,
    /// Short prefix for derived code objects (`Exa_TAPIs_BUR`, `Mat_evaluer_num`).
    pub abbrev: String,
    pub table_name_override: Option<String>,
    pub journaled: bool,
    pub attributes: Vec<Attribute>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum InitExpr {
    Now,
}

impl fmt::Display for InitExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitExpr::Now => f.write_str("now()"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Attribute {
    pub name: String,
    pub data_type: W3CType,
    /// «M»
    pub mandatory: bool,
    /// «UID-i»
    pub uid_index: Option<u32>,
    pub uppercase: bool,
    pub init: Option<InitExpr>,
    /// `{frozen}`
    pub frozen: bool,
    /// Attribute-level «journaled». Never valid; kept so that conformance can report it.
    pub journaled: bool,
}

impl Attribute {
    pub fn new(name: impl Into<String>, data_type: W3CType) -> Self {
        Attribute {
            name: name.into(),
            data_type,
            mandatory: false,
            uid_index: None,
            uppercase: false,
            init: None,
            frozen: false,
            journaled: false,
        }
    }

    pub fn mandatory(mut self) -> Self {
        self.mandatory = true;
        self
    }

    pub fn uid(mut self, index: u32) -> Self {
        self.uid_index = Some(index);
        self
    }

    pub fn frozen(mut self) -> Self {
        self.frozen = true;
        self
    }

    pub fn init_now(mut self) -> Self {
        self.init = Some(InitExpr::Now);
        self
    }

    pub fn uppercase(mut self) -> Self {
        self.uppercase = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MinCard {
    Zero,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MaxCard {
    One,
    Many,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Cardinality {
    pub min: MinCard,
    pub max: MaxCard,
}

impl Cardinality {
    pub const ZERO_ONE: Cardinality = Cardinality { min: MinCard::Zero, max: MaxCard::One };
    pub const ONE_ONE: Cardinality = Cardinality { min: MinCard::One, max: MaxCard::One };
    pub const ZERO_MANY: Cardinality = Cardinality { min: MinCard::Zero, max: MaxCard::Many };
    pub const ONE_MANY: Cardinality = Cardinality { min: MinCard::One, max: MaxCard::Many };

    pub const ALL: [Cardinality; 4] =
        [Cardinality::ZERO_ONE, Cardinality::ONE_ONE, Cardinality::ZERO_MANY, Cardinality::ONE_MANY];

    pub fn parse(min: &str, max: &str) -> Option<Cardinality> {
        let min = match min {
            "0" => MinCard::Zero,
            "1" => MinCard::One,
            _ => return None,
        };
        let max = match max {
            "1" => MaxCard::One,
            "*" => MaxCard::Many,
            _ => return None,
        };
        Some(Cardinality { min, max })
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let min = match self.min {
            MinCard::Zero => "0",
            MinCard::One => "1",
        };
        let max = match self.max {
            MaxCard::One => "1",
            MaxCard::Many => "*",
        };
        write!(f, "{min}..{max}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssociationEnd {
    pub entity: String,
    pub role: String,
    pub cardinality: Cardinality,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Association {
    pub name: String,
    /// «PK»: identifying composition.
    pub identifying: bool,
    pub parent: AssociationEnd,
    pub child: AssociationEnd,
    /// Pseudo-associative entity payload.
    pub pea_attributes: Vec<Attribute>,
}

/// Abbreviation used when the model does not set one: first three
/// alphanumeric characters, first letter capitalized.
pub fn default_abbrev(entity_name: &str) -> String {
    let mut out: String = entity_name.chars().filter(|c| c.is_ascii_alphanumeric()).take(3).collect();
    if let Some(first) = out.get(0..1) {
        let upper = first.to_ascii_uppercase();
        out.replace_range(0..1, &upper);
    }
    out
}

pub fn default_table_name(entity_name: &str) -> String {
    format!("{entity_name}s")
}

/// Parent role used when the model does not name one: the association name.
pub fn default_role(association: &str) -> String {
    association.to_string()
}

/// Column name carrying a PEA attribute: `<role><CapitalizedAttr>`.
pub fn pea_column_name(role: &str, attribute: &str) -> String {
    let mut chars = attribute.chars();
    match chars.next() {
        Some(first) => format!("{role}{}{}", first.to_uppercase(), chars.as_str()),
        None => role.to_string(),
    }
}

impl Entity {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        Entity {
            abbrev: default_abbrev(&name),
            name,
            table_name_override: None,
            journaled: false,
            attributes: Vec::new(),
        }
    }

    pub fn with_attribute(mut self, attribute: Attribute) -> Self {
        self.attributes.push(attribute);
        self
    }

    pub fn table_name(&self) -> String {
        self.table_name_override.clone().unwrap_or_else(|| default_table_name(&self.name))
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    /// Attributes of natural identifier `index`, in declaration order.
    pub fn uid_members(&self, index: u32) -> impl Iterator<Item = &Attribute> {
        self.attributes.iter().filter(move |a| a.uid_index == Some(index))
    }

    pub fn uid_indices(&self) -> BTreeSet<u32> {
        self.attributes.iter().filter_map(|a| a.uid_index).collect()
    }

    pub fn verify(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for a in &self.attributes {
            if !seen.insert(a.name.as_str()) {
                out.push(format!("duplicate attribute {}", a.name));
            }
            out.extend(a.verify().into_iter().map(|v| format!("attribute {}: {v}", a.name)));
        }
        if self.abbrev.is_empty() || !self.abbrev.chars().all(|c| c.is_ascii_alphanumeric()) {
            out.push(format!("abbrev {:?} must be non-empty and alphanumeric", self.abbrev));
        }
        if self.abbrev.chars().count() > 4 {
            out.push(format!("abbrev {:?} longer than 4 characters", self.abbrev));
        }
        let indices = self.uid_indices();
        let k = indices.len() as u32;
        if indices.iter().copied().ne(1..=k) {
            out.push(format!("UID indices {indices:?} are not contiguous from 1"));
        }
        out
    }
}

impl Attribute {
    pub fn verify(&self) -> Vec<String> {
        let mut out = self.data_type.verify();
        if self.init == Some(InitExpr::Now) && !self.data_type.base.is_temporal() {
            out.push(format!("init=now() requires date or dateTime, found {}", self.data_type));
        }
        if self.uid_index == Some(0) {
            out.push("UID index must be positive".to_string());
        }
        out
    }

    pub fn is_string_family(&self) -> bool {
        self.data_type.base.is_string_family()
    }
}

impl Association {
    pub fn verify(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.parent.cardinality.max != MaxCard::One {
            out.push(format!("parent end cardinality {} is not of degree 1:n", self.parent.cardinality));
        }
        let mut seen = HashSet::new();
        for a in &self.pea_attributes {
            if !seen.insert(a.name.as_str()) {
                out.push(format!("duplicate PEA attribute {}", a.name));
            }
            out.extend(a.verify().into_iter().map(|v| format!("PEA {}: {v}", a.name)));
        }
        out
    }
}

impl ConceptualModel {
    pub fn new(name: impl Into<String>) -> Self {
        ConceptualModel { name: name.into(), journaled: false, entities: Vec::new(), associations: Vec::new() }
    }

    pub fn entity(&self, name: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.name == name)
    }

    pub fn association(&self, name: &str) -> Option<&Association> {
        self.associations.iter().find(|a| a.name == name)
    }

    /// Effective journaling: model-wide flag or entity flag.
    pub fn is_journaled(&self, entity: &Entity) -> bool {
        self.journaled || entity.journaled
    }

    /// Associations in which `entity` is the child, in declaration order.
    pub fn child_associations<'a>(&'a self, entity: &'a str) -> impl Iterator<Item = &'a Association> + 'a {
        self.associations.iter().filter(move |a| a.child.entity == entity)
    }

    /// Full structural check of every type invariant. The parser only
    /// enforces the syntactic and referential part; the semantic part is
    /// reported with rule ids by [`crate::conformance::check`].
    pub fn verify(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut names = HashSet::new();
        for e in &self.entities {
            if !names.insert(e.name.as_str()) {
                out.push(format!("duplicate entity {}", e.name));
            }
            out.extend(e.verify().into_iter().map(|v| format!("entity {}: {v}", e.name)));
        }
        let mut assoc_names = HashSet::new();
        for a in &self.associations {
            if !assoc_names.insert(a.name.as_str()) {
                out.push(format!("duplicate association {}", a.name));
            }
            for end in [&a.parent, &a.child] {
                if self.entity(&end.entity).is_none() {
                    out.push(format!("association {}: unknown entity {}", a.name, end.entity));
                }
            }
            out.extend(a.verify().into_iter().map(|v| format!("association {}: {v}", a.name)));
            if let Some(child) = self.entity(&a.child.entity) {
                for p in &a.pea_attributes {
                    let column = pea_column_name(&a.parent.role, &p.name);
                    if child.attribute(&column).is_some() {
                        out.push(format!(
                            "association {}: PEA column {column} collides with an attribute of {}",
                            a.name, child.name
                        ));
                    }
                }
            }
        }
        out
    }
}
