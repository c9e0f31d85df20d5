//! Seeded generation of conformant models, one-edit variants of a model
//! and single-rule violations, for property tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    Association, AssociationEnd, Attribute, BaseType, Cardinality, ConceptualModel, Entity, RuleId, W3CType,
};

const ENTITY_NAMES: [&str; 10] =
    ["Client", "Commande", "Produit", "Facture", "Livreur", "Stock", "Magasin", "Region", "Employe", "Salle"];

const ATTRIBUTE_NAMES: [&str; 12] = [
    "code",
    "nom",
    "libelle",
    "quantite",
    "prix",
    "dateCreation",
    "actif",
    "duree",
    "note",
    "reference",
    "numero",
    "statut",
];

const ASSOCIATION_NAMES: [&str; 8] =
    ["posseder", "gerer", "contenir", "livrer", "facturer", "suivre", "associer", "affecter"];

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_entities: usize,
    pub max_attributes: usize,
    pub max_associations: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_entities: 6, max_attributes: 5, max_associations: 6 }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_type(rng: &mut impl Rng) -> W3CType {
    let base = *BaseType::ALL.choose(rng).unwrap();
    match base {
        BaseType::String | BaseType::Token | BaseType::Word => {
            if rng.gen_bool(0.8) {
                W3CType::with_length(base, *[10, 20, 40].choose(rng).unwrap())
            } else {
                W3CType::new(base)
            }
        }
        BaseType::Decimal => match rng.gen_range(0..3) {
            0 => W3CType::new(base),
            1 => W3CType::decimal(8, 2),
            _ => W3CType::decimal(12, 0),
        },
        _ => W3CType::new(base),
    }
}

fn random_attribute(rng: &mut impl Rng, name: &str) -> Attribute {
    let mut a = Attribute::new(name, random_type(rng));
    a.mandatory = rng.gen_bool(0.4);
    a.frozen = rng.gen_bool(0.15);
    a.uppercase = a.is_string_family() && rng.gen_bool(0.2);
    if a.data_type.base.is_temporal() && rng.gen_bool(0.3) {
        a = a.init_now();
    }
    a
}

fn key_attribute(rng: &mut impl Rng, name: &str, index: u32) -> Attribute {
    let base = *[BaseType::Word, BaseType::Integer, BaseType::Token, BaseType::Date].choose(rng).unwrap();
    let data_type = if base.is_string_family() { W3CType::with_length(base, 20) } else { W3CType::new(base) };
    let mut a = Attribute::new(name, data_type).uid(index);
    a.mandatory = index == 1 || rng.gen_bool(0.5);
    a.uppercase = base.is_string_family() && rng.gen_bool(0.2);
    a
}

/// A conformant model with at most `cfg.max_entities` entities; «PK»
/// associations always point from an earlier to a later entity.
pub fn random_model(rng: &mut impl Rng, cfg: GenConfig) -> ConceptualModel {
    let mut m = ConceptualModel::new(format!("M{}", rng.gen_range(0..1000)));
    m.journaled = rng.gen_bool(0.15);
    let n = rng.gen_range(1..=cfg.max_entities.min(ENTITY_NAMES.len()));
    let mut names = ENTITY_NAMES.to_vec();
    names.shuffle(rng);
    let mut verbs = ASSOCIATION_NAMES.to_vec();
    verbs.shuffle(rng);
    verbs.truncate(cfg.max_associations.min(ASSOCIATION_NAMES.len()));

    for (i, name) in names.iter().take(n).enumerate() {
        let mut e = Entity::new(*name);
        e.journaled = rng.gen_bool(0.3);
        if rng.gen_bool(0.1) {
            e.table_name_override = Some(format!("T_{}", name.to_uppercase()));
        }
        let mut attrs = ATTRIBUTE_NAMES.to_vec();
        attrs.shuffle(rng);
        let count = rng.gen_range(1..=cfg.max_attributes);
        let by_parent = i > 0 && !verbs.is_empty() && rng.gen_bool(0.4);
        for (j, a) in attrs.iter().take(count).enumerate() {
            let attr = match j {
                0 if !by_parent || rng.gen_bool(0.7) => key_attribute(rng, a, 1),
                1 if e.attributes[0].uid_index == Some(1) && rng.gen_bool(0.15) => key_attribute(rng, a, 2),
                _ => random_attribute(rng, a),
            };
            e.attributes.push(attr);
        }
        m.entities.push(e);
        if by_parent {
            let parent = rng.gen_range(0..i);
            let verb = verbs.pop().unwrap();
            m.associations.push(association(rng, &m, verb, parent, i, true));
        }
        if !e_has_key(&m, i) {
            m.entities[i].attributes.insert(0, key_attribute(rng, "cle", 1));
        }
    }
    while let Some(verb) = verbs.pop() {
        if n < 2 || rng.gen_bool(0.3) {
            break;
        }
        let parent = rng.gen_range(0..n);
        let mut child = rng.gen_range(0..n);
        if child == parent {
            child = (child + 1) % n;
        }
        m.associations.push(association(rng, &m, verb, parent, child, false));
    }
    m
}

fn e_has_key(m: &ConceptualModel, i: usize) -> bool {
    let name = &m.entities[i].name;
    m.entities[i].uid_indices().contains(&1) || m.associations.iter().any(|a| a.identifying && &a.child.entity == name)
}

fn association(
    rng: &mut impl Rng,
    m: &ConceptualModel,
    name: &str,
    parent: usize,
    child: usize,
    identifying: bool,
) -> Association {
    let role = if rng.gen_bool(0.2) { format!("{name}Par") } else { name.to_string() };
    let mut pea = Vec::new();
    if rng.gen_bool(0.3) {
        for attr in ["temps", "poids"].iter().take(rng.gen_range(1..=2)) {
            let mut a = random_attribute(rng, attr);
            a.frozen = false;
            pea.push(a);
        }
    }
    Association {
        name: name.to_string(),
        identifying,
        parent: AssociationEnd {
            entity: m.entities[parent].name.clone(),
            role,
            cardinality: if identifying || rng.gen_bool(0.5) { Cardinality::ONE_ONE } else { Cardinality::ZERO_ONE },
        },
        child: AssociationEnd {
            entity: m.entities[child].name.clone(),
            role: m.entities[child].name.to_lowercase(),
            cardinality: *[Cardinality::ZERO_MANY, Cardinality::ONE_MANY].choose(rng).unwrap(),
        },
        pea_attributes: pea,
    }
}

fn fresh_name(taken: impl Fn(&str) -> bool, stem: &str) -> String {
    (1..).map(|k| format!("{stem}{k}")).find(|n| !taken(n)).unwrap()
}

/// A copy of `model` with one conformance-preserving edit that only adds
/// or only removes columns of any given table.
pub fn mutate(rng: &mut impl Rng, model: &ConceptualModel) -> ConceptualModel {
    let mut m = model.clone();
    for _ in 0..16 {
        let ei = rng.gen_range(0..m.entities.len());
        let e = &mut m.entities[ei];
        let plain: Vec<usize> = (0..e.attributes.len()).filter(|&j| e.attributes[j].uid_index.is_none()).collect();
        let strings: Vec<usize> =
            (0..e.attributes.len()).filter(|&j| e.attributes[j].data_type.length.is_some()).collect();
        match rng.gen_range(0..9) {
            0 => {
                let name = fresh_name(|n| e.attribute(n).is_some(), "ajout");
                let mut a = random_attribute(rng, &name);
                a.mandatory = false;
                e.attributes.push(a);
            }
            1 if !plain.is_empty() => {
                e.attributes.remove(*plain.choose(rng).unwrap());
            }
            2 if !strings.is_empty() => {
                let t = &mut e.attributes[*strings.choose(rng).unwrap()].data_type;
                let n = t.length.unwrap();
                t.length = Some(if rng.gen_bool(0.5) { n * 2 } else { (n / 2).max(1) });
            }
            3 if !plain.is_empty() => {
                let a = &mut e.attributes[*plain.choose(rng).unwrap()];
                a.mandatory = !a.mandatory;
            }
            4 => e.journaled = !e.journaled,
            5 if !plain.is_empty() => {
                let a = &mut e.attributes[*plain.choose(rng).unwrap()];
                a.frozen = !a.frozen;
            }
            6 if !strings.is_empty() => {
                let a = &mut e.attributes[*strings.choose(rng).unwrap()];
                a.uppercase = !a.uppercase;
            }
            7 => {
                let Some(name) = ENTITY_NAMES.iter().find(|n| m.entity(n).is_none()) else {
                    continue;
                };
                let mut new = Entity::new(*name);
                new.attributes.push(key_attribute(rng, "cle", 1));
                new.attributes.push(random_attribute(rng, "nom"));
                m.entities.push(new);
                if rng.gen_bool(0.5) {
                    let verb = fresh_name(|n| m.association(n).is_some(), "relier");
                    let last = m.entities.len() - 1;
                    m.associations.push(association(rng, &m, &verb, last, ei, false));
                }
            }
            _ => {
                let name = e.name.clone();
                if m.entities.len() < 2 || m.associations.iter().any(|a| a.parent.entity == name) {
                    continue;
                }
                m.entities.remove(ei);
                m.associations.retain(|a| a.child.entity != name);
            }
        }
        if m != *model {
            return m;
        }
    }
    m
}

fn fresh_entity(m: &ConceptualModel) -> Entity {
    let k = (1..).find(|k| m.entity(&format!("Inj{k}")).is_none()).unwrap();
    let mut e = Entity::new(format!("Inj{k}"));
    e.abbrev = format!("J{k}");
    e
}

fn cle() -> Attribute {
    Attribute::new("cle", W3CType::new(BaseType::Integer)).uid(1).mandatory()
}

fn link(m: &ConceptualModel, parent: &str, child: &str, identifying: bool, card: Cardinality) -> Association {
    let name = fresh_name(|n| m.association(n).is_some(), "inj");
    Association {
        parent: AssociationEnd { entity: parent.to_string(), role: name.clone(), cardinality: card },
        child: AssociationEnd {
            entity: child.to_string(),
            role: child.to_lowercase(),
            cardinality: Cardinality::ZERO_MANY,
        },
        name,
        identifying,
        pea_attributes: Vec::new(),
    }
}

/// Adds fresh elements to a conformant model so that exactly one more
/// diagnostic, of rule `rule`, is reported.
pub fn inject(rng: &mut impl Rng, model: &mut ConceptualModel, rule: RuleId) {
    let root = model
        .entities
        .iter()
        .find(|e| e.uid_indices().contains(&1))
        .expect("a conformant model has a root entity")
        .name
        .clone();
    let host = rng.gen_range(0..model.entities.len());
    let attr_name = fresh_name(|n| model.entities[host].attribute(n).is_some(), "inj");
    let mut e = fresh_entity(model);
    match rule {
        RuleId::R1 | RuleId::R2 | RuleId::R7 => {
            e.attributes.push(cle());
            let (identifying, card) = match rule {
                RuleId::R1 => (true, Cardinality::ZERO_ONE),
                RuleId::R2 => (false, Cardinality::ZERO_MANY),
                _ => (false, Cardinality::ZERO_ONE),
            };
            let mut a = link(model, &root, &e.name, identifying, card);
            if rule == RuleId::R7 {
                a.pea_attributes.push(Attribute::new("rang", W3CType::new(BaseType::Integer)).uid(1));
            }
            model.entities.push(e);
            model.associations.push(a);
        }
        RuleId::R3 => {
            e.attributes.push(Attribute::new("nom", W3CType::with_length(BaseType::Token, 20)));
            model.entities.push(e);
        }
        RuleId::R4 => {
            e.attributes.push(cle());
            e.attributes.push(Attribute::new("alt", W3CType::new(BaseType::Integer)).uid(3));
            model.entities.push(e);
        }
        RuleId::R6 => {
            e.attributes.push(cle().frozen());
            model.entities.push(e);
        }
        RuleId::R10 => {
            e.abbrev = model.entity(&root).unwrap().abbrev.clone();
            e.attributes.push(cle());
            model.entities.push(e);
        }
        RuleId::R5 | RuleId::R8 | RuleId::R9 => {
            let mut a = Attribute::new(attr_name, W3CType::new(BaseType::Integer));
            match rule {
                RuleId::R5 => a.init = Some(crate::model::InitExpr::Now),
                RuleId::R8 => a.uppercase = true,
                _ => a.journaled = true,
            }
            model.entities[host].attributes.push(a);
        }
        other => panic!("{other} is not a conformance rule"),
    }
}
