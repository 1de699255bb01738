use std::collections::BTreeSet;

use super::quoted;
use crate::model::{derive_progenitor_pairs, ProvenanceDocument, QualifiedId};

const HEADER: &str = "digraph provenance {\n  rankdir=BT;\n  node [fontname=\"Helvetica\", fontsize=10];\n  edge [fontname=\"Helvetica\", fontsize=8];\n";

fn label_of(doc: &ProvenanceDocument, id: &QualifiedId) -> String {
    let name = if let Some(e) = doc.entities.get(id) {
        e.name.clone()
    } else if let Some(a) = doc.activities.get(id) {
        a.name.clone()
    } else if let Some(g) = doc.agents.get(id) {
        Some(g.name.clone()).filter(|n| !n.is_empty())
    } else {
        doc.descriptions
            .get(id)
            .map(|d| d.name.clone())
            .filter(|n| !n.is_empty())
    };
    name.unwrap_or_else(|| id.to_string())
}

fn node_line(doc: &ProvenanceDocument, id: &QualifiedId, shape: &str) -> String {
    let mut attrs = vec![format!("shape={shape}"), format!("label={}", quoted(&label_of(doc, id)))];
    if doc.is_stub(id) {
        attrs.push("style=dashed".to_owned());
    }
    format!("  {} [{}];\n", quoted(&id.to_string()), attrs.join(", "))
}

fn edge_label(relation: &str, role: Option<&String>) -> String {
    match role {
        Some(r) => format!("{relation} ({r})"),
        None => relation.to_owned(),
    }
}

/// Graphviz DOT: entities as ellipses, activities as boxes, agents as
/// houses, descriptions as notes, stubs dashed. One edge per relation in
/// PROV direction (from the dependent record). Node and edge lines are
/// sorted, so the output is byte-deterministic.
pub fn to_dot(doc: &ProvenanceDocument) -> String {
    let mut nodes: Vec<(String, String)> = Vec::new();
    for id in doc.entities.keys() {
        nodes.push((id.to_string(), node_line(doc, id, "ellipse")));
    }
    for id in doc.activities.keys() {
        nodes.push((id.to_string(), node_line(doc, id, "box")));
    }
    for id in doc.agents.keys() {
        nodes.push((id.to_string(), node_line(doc, id, "house")));
    }
    for id in doc.descriptions.keys() {
        nodes.push((id.to_string(), node_line(doc, id, "note")));
    }
    nodes.sort();

    let mut edges: BTreeSet<(String, String, String)> = BTreeSet::new();
    for u in doc.used.values() {
        edges.insert((u.activity.to_string(), u.entity.to_string(), edge_label("used", u.role.as_ref())));
    }
    for g in doc.generations.values() {
        edges.insert((
            g.entity.to_string(),
            g.activity.to_string(),
            edge_label("wasGeneratedBy", g.role.as_ref()),
        ));
    }
    for a in doc.associations.values() {
        edges.insert((
            a.activity.to_string(),
            a.agent.to_string(),
            edge_label("wasAssociatedWith", a.role.as_ref()),
        ));
    }
    for a in doc.attributions.values() {
        edges.insert((
            a.entity.to_string(),
            a.agent.to_string(),
            edge_label("wasAttributedTo", a.role.as_ref()),
        ));
    }

    let mut out = String::from(HEADER);
    for (_, line) in nodes {
        out.push_str(&line);
    }
    for (from, to, label) in edges {
        out.push_str(&format!("  {} -> {} [label={}];\n", quoted(&from), quoted(&to), quoted(&label)));
    }
    out.push_str("}\n");
    out
}

/// Entity-only view: one `wasDerivedFrom` edge per progenitor pair.
pub fn to_dot_derivations(doc: &ProvenanceDocument) -> String {
    let mut out = String::from(HEADER);
    for id in doc.entities.keys() {
        out.push_str(&node_line(doc, id, "ellipse"));
    }
    for (derived, source) in derive_progenitor_pairs(doc) {
        out.push_str(&format!(
            "  {} -> {} [label=\"wasDerivedFrom\"];\n",
            quoted(&derived.to_string()),
            quoted(&source.to_string())
        ));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn id(s: &str) -> QualifiedId {
        QualifiedId::from_rendered(s).unwrap()
    }

    #[test]
    fn empty() {
        assert_eq!(to_dot(&ProvenanceDocument::default()), format!("{HEADER}}}\n"));
    }

    #[test]
    fn single_used_edge() {
        let mut doc = ProvenanceDocument::default();
        doc.add_entity(Entity::new(id("ex:raw"))).unwrap();
        doc.add_activity(Activity::new(id("ex:a1"))).unwrap();
        doc.add_used(Used::new(id("ex:a1"), id("ex:raw"))).unwrap();
        let text = to_dot(&doc);
        assert!(text.contains("  \"ex:a1\" -> \"ex:raw\" [label=\"used\"];\n"));
        assert_eq!(text.matches(" -> ").count(), 1);
    }

    #[test]
    fn stubs_dashed_and_roles_labelled() {
        let mut doc = ProvenanceDocument::default();
        doc.ensure_entity_stub(&id("ex:raw"));
        doc.add_activity(Activity::named(id("ex:a1"), "calibrate")).unwrap();
        let mut u = Used::new(id("ex:a1"), id("ex:raw"));
        u.role = Some("flat".into());
        doc.add_used(u).unwrap();
        let text = to_dot(&doc);
        assert!(text.contains("  \"ex:raw\" [shape=ellipse, label=\"ex:raw\", style=dashed];\n"));
        assert!(text.contains("  \"ex:a1\" [shape=box, label=\"calibrate\"];\n"));
        assert!(text.contains("[label=\"used (flat)\"]"));
    }

    #[test]
    fn derivations_view() {
        let mut doc = ProvenanceDocument::default();
        doc.add_entity(Entity::new(id("ex:raw"))).unwrap();
        doc.add_entity(Entity::new(id("ex:out"))).unwrap();
        doc.add_activity(Activity::new(id("ex:a1"))).unwrap();
        doc.add_used(Used::new(id("ex:a1"), id("ex:raw"))).unwrap();
        doc.add_generation(WasGeneratedBy::new(id("ex:out"), id("ex:a1"))).unwrap();
        let text = to_dot_derivations(&doc);
        assert!(text.contains("\"ex:out\" -> \"ex:raw\" [label=\"wasDerivedFrom\"]"));
        assert!(!text.contains("ex:a1"));
    }
}
