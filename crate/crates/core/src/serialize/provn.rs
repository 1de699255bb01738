use super::quoted;
use crate::model::{vocab, ProvenanceDocument, QualifiedId, Timestamp, ValueType, PROV_PREFIX};

const DESCRIPTION_TYPE: &str = "voprov:ActivityDescription";

#[derive(Default)]
struct AttrList(Vec<(String, String)>);

impl AttrList {
    fn string(&mut self, key: &str, value: &str) {
        self.0.push((key.to_owned(), quoted(value)));
    }

    fn opt_string(&mut self, key: &str, value: Option<&String>) {
        if let Some(v) = value {
            self.string(key, v);
        }
    }

    fn time(&mut self, key: &str, value: Option<&Timestamp>) {
        if let Some(t) = value {
            self.0.push((key.to_owned(), format!("{}%%xsd:dateTime", quoted(&t.to_string()))));
        }
    }

    fn qname(&mut self, key: &str, value: &str) {
        self.0.push((key.to_owned(), format!("'{value}'")));
    }

    fn stub(&mut self, doc: &ProvenanceDocument, id: &QualifiedId) {
        if doc.is_stub(id) {
            self.0.push((vocab::STUB.to_owned(), "\"true\"%%xsd:boolean".to_owned()));
        }
    }

    /// `, [k=v, ...]`, or nothing when empty. Keys are sorted.
    fn render(mut self) -> String {
        if self.0.is_empty() {
            return String::new();
        }
        self.0.sort();
        let body: Vec<String> = self.0.into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(", [{}]", body.join(", "))
    }
}

fn typed_literal(value: &str, value_type: ValueType) -> String {
    let xsd = match value_type {
        ValueType::String => return quoted(value),
        ValueType::Integer => "xsd:long",
        ValueType::Real => "xsd:double",
        ValueType::Boolean => "xsd:boolean",
        ValueType::Timestamp => "xsd:dateTime",
    };
    format!("{}%%{xsd}", quoted(value))
}

fn opt_time(t: Option<&Timestamp>) -> String {
    t.map_or_else(|| "-".to_owned(), Timestamp::to_string)
}

/// PROV-N text. Statements are grouped by kind (entity, activity, agent,
/// used, wasGeneratedBy, wasAssociatedWith, wasAttributedTo) and sorted by
/// their first id within each group. Activity descriptions are written as
/// typed entities and parameters as typed activity attributes.
pub fn to_prov_n(doc: &ProvenanceDocument) -> String {
    let mut out = String::from("document\n");
    if let Some(uri) = doc.namespaces.uri(doc.namespaces.default_prefix()) {
        out.push_str(&format!("  default <{uri}>\n"));
    }
    for (prefix, uri) in doc.namespaces.iter() {
        if prefix != PROV_PREFIX {
            out.push_str(&format!("  prefix {prefix} <{uri}>\n"));
        }
    }

    let mut entities: Vec<(&QualifiedId, String)> = Vec::new();
    for e in doc.entities.values() {
        let mut attrs = AttrList::default();
        attrs.opt_string(vocab::LABEL, e.name.as_ref());
        attrs.opt_string(vocab::LOCATION, e.location.as_ref());
        attrs.time(vocab::GENERATED_AT, e.generated_at.as_ref());
        attrs.opt_string(vocab::COMMENT, e.comment.as_ref());
        for (k, v) in &e.attributes {
            attrs.string(k, v);
        }
        attrs.stub(doc, &e.id);
        entities.push((&e.id, format!("entity({}{})", e.id, attrs.render())));
    }
    for d in doc.descriptions.values() {
        let mut attrs = AttrList::default();
        attrs.qname(vocab::TYPE, DESCRIPTION_TYPE);
        if !d.name.is_empty() {
            attrs.string(vocab::NAME, &d.name);
        }
        attrs.opt_string(vocab::VERSION, d.version.as_ref());
        attrs.opt_string(vocab::DOC, d.doc.as_ref());
        attrs.opt_string(vocab::DOCURL, d.docurl.as_ref());
        if let Some(c) = &d.code_reference {
            attrs.string(vocab::CODE_REF, &c.uri);
            attrs.opt_string(vocab::CODE_REVISION, c.revision.as_ref());
        }
        attrs.stub(doc, &d.id);
        entities.push((&d.id, format!("entity({}{})", d.id, attrs.render())));
    }
    entities.sort();

    let mut lines: Vec<String> = entities.into_iter().map(|(_, l)| l).collect();
    for a in doc.activities.values() {
        let mut attrs = AttrList::default();
        attrs.opt_string(vocab::LABEL, a.name.as_ref());
        if let Some(d) = &a.description_ref {
            attrs.qname(vocab::DESCRIPTION, &d.to_string());
        }
        attrs.opt_string(vocab::COMMENT, a.comment.as_ref());
        for (k, v) in &a.attributes {
            attrs.string(k, v);
        }
        for p in doc.parameters_of(&a.id) {
            attrs
                .0
                .push((format!("{}{}", vocab::PARAMETER_PREFIX, p.name), typed_literal(&p.value, p.value_type)));
        }
        attrs.stub(doc, &a.id);
        lines.push(format!(
            "activity({}, {}, {}{})",
            a.id,
            opt_time(a.start_time.as_ref()),
            opt_time(a.end_time.as_ref()),
            attrs.render()
        ));
    }
    for g in doc.agents.values() {
        let mut attrs = AttrList::default();
        if !g.name.is_empty() {
            attrs.string(vocab::LABEL, &g.name);
        }
        if let Some(kind) = g.kind {
            attrs.qname(vocab::TYPE, &format!("prov:{}", kind.as_str()));
        }
        attrs.opt_string(vocab::EMAIL, g.email.as_ref());
        for (k, v) in &g.attributes {
            attrs.string(k, v);
        }
        attrs.stub(doc, &g.id);
        lines.push(format!("agent({}{})", g.id, attrs.render()));
    }
    for u in doc.used.values() {
        let mut attrs = AttrList::default();
        attrs.opt_string(vocab::ROLE, u.role.as_ref());
        lines.push(format!(
            "used({}, {}, {}{})",
            u.activity,
            u.entity,
            opt_time(u.time.as_ref()),
            attrs.render()
        ));
    }
    for g in doc.generations.values() {
        let mut attrs = AttrList::default();
        attrs.opt_string(vocab::ROLE, g.role.as_ref());
        lines.push(format!(
            "wasGeneratedBy({}, {}, {}{})",
            g.entity,
            g.activity,
            opt_time(g.time.as_ref()),
            attrs.render()
        ));
    }
    for a in doc.associations.values() {
        let mut attrs = AttrList::default();
        attrs.opt_string(vocab::ROLE, a.role.as_ref());
        lines.push(format!("wasAssociatedWith({}, {}, -{})", a.activity, a.agent, attrs.render()));
    }
    for a in doc.attributions.values() {
        let mut attrs = AttrList::default();
        attrs.opt_string(vocab::ROLE, a.role.as_ref());
        lines.push(format!("wasAttributedTo({}, {}{})", a.entity, a.agent, attrs.render()));
    }

    for line in lines {
        out.push_str("  ");
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("endDocument\n");
    out
}
