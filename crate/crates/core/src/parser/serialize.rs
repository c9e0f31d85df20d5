use std::fmt::Write;

use crate::model::conceptual::default_role;
use crate::model::{Attribute, ConceptualModel};

use super::is_default_abbrev;

/// Canonical text: one declaration per line, guillemet stereotypes,
/// defaults (abbrev, role) omitted.
pub fn serialize(model: &ConceptualModel) -> String {
    let mut out = String::new();
    out.push_str("model ");
    out.push_str(&model.name);
    if model.journaled {
        out.push_str(" «journaled»");
    }
    out.push_str(" {\n");
    for e in &model.entities {
        out.push_str("  entity ");
        out.push_str(&e.name);
        if e.journaled {
            out.push_str(" «journaled»");
        }
        if !is_default_abbrev(e) {
            let _ = write!(out, " abbrev={}", e.abbrev);
        }
        if let Some(t) = &e.table_name_override {
            let _ = write!(out, " table={t}");
        }
        out.push_str(" {\n");
        for a in &e.attributes {
            attribute(&mut out, "    ", a);
        }
        out.push_str("  }\n");
    }
    for a in &model.associations {
        out.push_str("  association ");
        out.push_str(&a.name);
        if a.identifying {
            out.push_str(" «PK»");
        }
        out.push_str(" {\n");
        let _ = write!(out, "    parent {} [{}]", a.parent.entity, a.parent.cardinality);
        if a.parent.role != default_role(&a.name) {
            let _ = write!(out, " role {}", a.parent.role);
        }
        out.push('\n');
        let _ = writeln!(out, "    child {} [{}]", a.child.entity, a.child.cardinality);
        if !a.pea_attributes.is_empty() {
            out.push_str("    attrs {\n");
            for p in &a.pea_attributes {
                attribute(&mut out, "      ", p);
            }
            out.push_str("    }\n");
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

fn attribute(out: &mut String, indent: &str, a: &Attribute) {
    let _ = write!(out, "{indent}{}: {}", a.name, a.data_type);
    if let Some(i) = a.uid_index {
        let _ = write!(out, " «UID-{i}»");
    }
    if a.mandatory {
        out.push_str(" «M»");
    }
    if a.uppercase {
        out.push_str(" «uppercase»");
    }
    if a.journaled {
        out.push_str(" «journaled»");
    }
    if let Some(init) = a.init {
        let _ = write!(out, " init={init}");
    }
    if a.frozen {
        out.push_str(" {frozen}");
    }
    out.push('\n');
}
