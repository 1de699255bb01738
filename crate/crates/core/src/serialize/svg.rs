use std::collections::BTreeMap;
use std::fmt::Write as _;

use petgraph::algo::toposort;
use petgraph::graph::{DiGraph, NodeIndex};

use super::SerializeError;
use crate::model::{ProvenanceDocument, QualifiedId, RecordClass};

const NODE_W: f64 = 140.0;
const NODE_H: f64 = 44.0;
const COL: f64 = 180.0;
const ROW: f64 = 100.0;
const MARGIN: f64 = 30.0;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

struct Edge {
    from: QualifiedId,
    to: QualifiedId,
    class: &'static str,
}

/// Edges in PROV direction; layering follows them, so records nobody
/// depends on (final products) land in layer 0 at the top.
fn edges(doc: &ProvenanceDocument) -> Vec<Edge> {
    let mut out = Vec::new();
    for g in doc.generations.values() {
        out.push(Edge { from: g.entity.clone(), to: g.activity.clone(), class: "wasGeneratedBy" });
    }
    for u in doc.used.values() {
        out.push(Edge { from: u.activity.clone(), to: u.entity.clone(), class: "used" });
    }
    for a in doc.associations.values() {
        out.push(Edge { from: a.activity.clone(), to: a.agent.clone(), class: "wasAssociatedWith" });
    }
    for a in doc.attributions.values() {
        out.push(Edge { from: a.entity.clone(), to: a.agent.clone(), class: "wasAttributedTo" });
    }
    out
}

/// Longest-path layer of every record.
fn layers(doc: &ProvenanceDocument, edges: &[Edge]) -> Result<BTreeMap<QualifiedId, usize>, SerializeError> {
    let mut graph: DiGraph<QualifiedId, ()> = DiGraph::new();
    let mut nodes: BTreeMap<QualifiedId, NodeIndex> = BTreeMap::new();
    for id in doc.record_ids() {
        nodes.insert(id.clone(), graph.add_node(id));
    }
    let mut arcs = Vec::new();
    for e in edges {
        if let (Some(&a), Some(&b)) = (nodes.get(&e.from), nodes.get(&e.to)) {
            arcs.push((a, b));
        }
    }
    for a in doc.activities.values() {
        if let Some(d) = &a.description_ref {
            if let Some(&b) = nodes.get(d) {
                arcs.push((nodes[&a.id], b));
            }
        }
    }
    for (a, b) in arcs {
        graph.add_edge(a, b, ());
    }
    let order = toposort(&graph, None)
        .map_err(|cycle| SerializeError::CyclicGraph(graph[cycle.node_id()].to_string()))?;
    let mut layer = vec![0usize; graph.node_count()];
    for n in order {
        for m in graph.neighbors(n) {
            layer[m.index()] = layer[m.index()].max(layer[n.index()] + 1);
        }
    }
    Ok(nodes.into_iter().map(|(id, n)| (id, layer[n.index()])).collect())
}

fn label_of(doc: &ProvenanceDocument, id: &QualifiedId) -> String {
    let name = match doc.class_of(id) {
        Some(RecordClass::Entity) => doc.entities[id].name.clone(),
        Some(RecordClass::Activity) => doc.activities[id].name.clone(),
        Some(RecordClass::Agent) => Some(doc.agents[id].name.clone()),
        Some(RecordClass::ActivityDescription) => Some(doc.descriptions[id].name.clone()),
        None => None,
    };
    name.filter(|n| !n.is_empty()).unwrap_or_else(|| id.to_string())
}

fn glyph(class: RecordClass, cx: f64, cy: f64) -> String {
    let (hw, hh) = (NODE_W / 2.0, NODE_H / 2.0);
    match class {
        RecordClass::Entity => format!(r#"<ellipse cx="{cx}" cy="{cy}" rx="{hw}" ry="{hh}"/>"#),
        RecordClass::Activity => format!(
            r#"<rect x="{}" y="{}" width="{NODE_W}" height="{NODE_H}"/>"#,
            cx - hw,
            cy - hh
        ),
        RecordClass::Agent => {
            let roof = cy - hh;
            let eave = cy - hh / 2.0;
            let base = cy + hh;
            format!(
                r#"<polygon points="{cx},{roof} {},{eave} {},{base} {},{base} {},{eave}"/>"#,
                cx + hw,
                cx + hw,
                cx - hw,
                cx - hw
            )
        }
        RecordClass::ActivityDescription => format!(
            r#"<rect x="{}" y="{}" width="{NODE_W}" height="{NODE_H}" rx="8"/>"#,
            cx - hw,
            cy - hh
        ),
    }
}

/// Point where the segment from the centre of a node towards `(tx, ty)`
/// leaves its bounding box.
fn border(cx: f64, cy: f64, tx: f64, ty: f64) -> (f64, f64) {
    let (dx, dy) = (tx - cx, ty - cy);
    if dx == 0.0 && dy == 0.0 {
        return (cx, cy);
    }
    let sx = if dx == 0.0 { f64::INFINITY } else { (NODE_W / 2.0) / dx.abs() };
    let sy = if dy == 0.0 { f64::INFINITY } else { (NODE_H / 2.0) / dy.abs() };
    let s = sx.min(sy).min(1.0);
    (cx + dx * s, cy + dy * s)
}

fn num(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

/// Self-contained SVG with a layered layout: layer by longest path from
/// the final products, order within a layer by id. Fails on cycles.
pub fn to_svg(doc: &ProvenanceDocument) -> Result<String, SerializeError> {
    let edges = edges(doc);
    let layer_of = layers(doc, &edges)?;

    let mut rows: BTreeMap<usize, Vec<&QualifiedId>> = BTreeMap::new();
    for (id, l) in &layer_of {
        rows.entry(*l).or_default().push(id);
    }
    let widest = rows.values().map(Vec::len).max().unwrap_or(0);
    let width = MARGIN * 2.0 + COL * widest.max(1) as f64;
    let height = MARGIN * 2.0 + ROW * rows.len().max(1) as f64;

    let mut centre: BTreeMap<&QualifiedId, (f64, f64)> = BTreeMap::new();
    for (l, ids) in &rows {
        let offset = (widest - ids.len()) as f64 * COL / 2.0;
        for (i, id) in ids.iter().enumerate() {
            let cx = MARGIN + offset + COL * i as f64 + COL / 2.0;
            let cy = MARGIN + ROW * *l as f64 + ROW / 2.0;
            centre.insert(id, (cx, cy));
        }
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="Helvetica, Arial, sans-serif" font-size="11">"#,
        num(width),
        num(height),
        num(width),
        num(height)
    );
    out.push_str(r#"<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="8" markerHeight="8" orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>"#);
    out.push('\n');
    out.push_str(r#"<style>.node ellipse, .node rect, .node polygon { fill: #fff; stroke: #333; } .entity ellipse { fill: #fffcd0; } .activity rect { fill: #cfceff; } .agent polygon { fill: #fed37f; } .stub ellipse, .stub rect, .stub polygon { stroke-dasharray: 4 3; } .edge line { stroke: #555; marker-end: url(#arrow); } text { text-anchor: middle; dominant-baseline: middle; }</style>"#);
    out.push('\n');

    let mut sorted_edges: Vec<&Edge> = edges.iter().collect();
    sorted_edges.sort_by(|a, b| (&a.from, &a.to, a.class).cmp(&(&b.from, &b.to, b.class)));
    for e in sorted_edges {
        let (Some(&(fx, fy)), Some(&(tx, ty))) = (centre.get(&e.from), centre.get(&e.to)) else {
            continue;
        };
        let (x1, y1) = border(fx, fy, tx, ty);
        let (x2, y2) = border(tx, ty, fx, fy);
        let _ = writeln!(
            out,
            r#"<g class="edge {}"><title>{} {} {}</title><line x1="{}" y1="{}" x2="{}" y2="{}"/></g>"#,
            e.class,
            escape(&e.from.to_string()),
            e.class,
            escape(&e.to.to_string()),
            num(x1),
            num(y1),
            num(x2),
            num(y2)
        );
    }

    for (id, &(cx, cy)) in &centre {
        let class = doc.class_of(id).expect("laid-out ids are records");
        let css = match class {
            RecordClass::Entity => "entity",
            RecordClass::Activity => "activity",
            RecordClass::Agent => "agent",
            RecordClass::ActivityDescription => "description",
        };
        let stub = if doc.is_stub(id) { " stub" } else { "" };
        let _ = writeln!(
            out,
            r#"<g class="node {css}{stub}" id="{}"><title>{}</title>{}<text x="{}" y="{}">{}</text></g>"#,
            escape(&id.to_string()),
            escape(&id.to_string()),
            glyph(class, cx, cy),
            num(cx),
            num(cy),
            escape(&label_of(doc, id))
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::*;

    fn id(s: &str) -> QualifiedId {
        QualifiedId::from_rendered(s).unwrap()
    }

    fn chain() -> ProvenanceDocument {
        let mut doc = ProvenanceDocument::default();
        for e in ["ex:raw", "ex:lvl1", "ex:lvl2"] {
            doc.add_entity(Entity::named(id(e), e)).unwrap();
        }
        doc.add_activity(Activity::new(id("ex:a1"))).unwrap();
        doc.add_activity(Activity::new(id("ex:a2"))).unwrap();
        doc.add_used(Used::new(id("ex:a1"), id("ex:raw"))).unwrap();
        doc.add_generation(WasGeneratedBy::new(id("ex:lvl1"), id("ex:a1"))).unwrap();
        doc.add_used(Used::new(id("ex:a2"), id("ex:lvl1"))).unwrap();
        doc.add_generation(WasGeneratedBy::new(id("ex:lvl2"), id("ex:a2"))).unwrap();
        doc
    }

    #[test]
    fn chain_layers() {
        let doc = chain();
        let layer = layers(&doc, &edges(&doc)).unwrap();
        assert_eq!(layer[&id("ex:lvl2")], 0);
        assert_eq!(layer[&id("ex:a2")], 1);
        assert_eq!(layer[&id("ex:lvl1")], 2);
        assert_eq!(layer[&id("ex:a1")], 3);
        assert_eq!(layer[&id("ex:raw")], 4);
    }

    #[test]
    fn deterministic() {
        assert_eq!(to_svg(&chain()).unwrap(), to_svg(&chain()).unwrap());
    }

    #[test]
    fn cycle_is_rejected() {
        let mut doc = chain();
        doc.add_used(Used::new(id("ex:a1"), id("ex:lvl2"))).unwrap();
        assert!(matches!(to_svg(&doc), Err(SerializeError::CyclicGraph(_))));
    }

    #[test]
    fn escapes_labels() {
        let mut doc = ProvenanceDocument::default();
        doc.add_entity(Entity::named(id("ex:e"), "a<b & \"c\"")).unwrap();
        let svg = to_svg(&doc).unwrap();
        assert!(svg.contains("a&lt;b &amp; &quot;c&quot;"));
    }
}
