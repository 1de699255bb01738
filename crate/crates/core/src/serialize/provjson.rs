use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::SerializeError;
use crate::model::{
    vocab, Activity, ActivityDescription, Agent, AgentKind, Attributes, CodeReference, Entity, Namespaces,
    Parameter, ProvenanceDocument, QualifiedId, Timestamp, Used, ValueType, WasAssociatedWith,
    WasAttributedTo, WasGeneratedBy,
};

const SECTIONS: [&str; 10] = [
    "prefix",
    "entity",
    "activity",
    "agent",
    "activityDescription",
    "parameter",
    "used",
    "wasGeneratedBy",
    "wasAssociatedWith",
    "wasAttributedTo",
];

const PROV_PERSON: &str = "prov:Person";
const PROV_ORGANIZATION: &str = "prov:Organization";
const PROV_SOFTWARE: &str = "prov:SoftwareAgent";

fn kind_type(kind: AgentKind) -> &'static str {
    match kind {
        AgentKind::Person => PROV_PERSON,
        AgentKind::Organization => PROV_ORGANIZATION,
        AgentKind::SoftwareAgent => PROV_SOFTWARE,
    }
}

struct Obj(Map<String, Value>);

impl Obj {
    fn new() -> Self {
        Obj(Map::new())
    }

    fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_owned(), Value::String(value.into()));
    }

    fn opt(&mut self, key: &str, value: Option<impl ToString>) {
        if let Some(v) = value {
            self.set(key, v.to_string());
        }
    }

    fn attrs(&mut self, attributes: &Attributes) {
        for (k, v) in attributes {
            self.set(k, v.clone());
        }
    }

    fn stub(&mut self, doc: &ProvenanceDocument, id: &QualifiedId) {
        if doc.is_stub(id) {
            self.set(vocab::STUB, "true");
        }
    }
}

fn section<'a, T: 'a>(
    root: &mut Map<String, Value>,
    name: &str,
    items: impl Iterator<Item = (String, &'a T)>,
    render: impl Fn(&T) -> Obj,
) {
    let mut out = Map::new();
    for (key, item) in items {
        out.insert(key, Value::Object(render(item).0));
    }
    if !out.is_empty() {
        root.insert(name.to_owned(), Value::Object(out));
    }
}

fn numbered<'a, T: 'a>(tag: &'a str, items: impl Iterator<Item = &'a T> + 'a) -> impl Iterator<Item = (String, &'a T)> + 'a {
    items.enumerate().map(move |(n, item)| (format!("_:{tag}{}", n + 1), item))
}

/// Canonical PROV-JSON: sorted keys, two-space indentation, trailing
/// newline. Relations get ids `_:u1`, `_:g1`, `_:as1`, `_:at1` (and
/// parameters `_:p1`) numbered in key order.
pub fn to_prov_json(doc: &ProvenanceDocument) -> String {
    let mut root = Map::new();

    let mut prefix = Obj::new();
    for (p, uri) in doc.namespaces.iter() {
        prefix.set(p, uri);
    }
    if let Some(uri) = doc.namespaces.uri(doc.namespaces.default_prefix()) {
        prefix.set("default", uri);
    }
    root.insert("prefix".into(), Value::Object(prefix.0));

    section(&mut root, "entity", doc.entities.iter().map(|(k, v)| (k.to_string(), v)), |e: &Entity| {
        let mut o = Obj::new();
        o.opt(vocab::LABEL, e.name.as_ref());
        o.opt(vocab::LOCATION, e.location.as_ref());
        o.opt(vocab::GENERATED_AT, e.generated_at.as_ref());
        o.opt(vocab::COMMENT, e.comment.as_ref());
        o.attrs(&e.attributes);
        o.stub(doc, &e.id);
        o
    });
    section(&mut root, "activity", doc.activities.iter().map(|(k, v)| (k.to_string(), v)), |a: &Activity| {
        let mut o = Obj::new();
        o.opt(vocab::LABEL, a.name.as_ref());
        o.opt(vocab::START_TIME, a.start_time.as_ref());
        o.opt(vocab::END_TIME, a.end_time.as_ref());
        o.opt(vocab::DESCRIPTION, a.description_ref.as_ref());
        o.opt(vocab::COMMENT, a.comment.as_ref());
        o.attrs(&a.attributes);
        o.stub(doc, &a.id);
        o
    });
    section(&mut root, "agent", doc.agents.iter().map(|(k, v)| (k.to_string(), v)), |g: &Agent| {
        let mut o = Obj::new();
        if !g.name.is_empty() {
            o.set(vocab::LABEL, g.name.clone());
        }
        o.opt(vocab::TYPE, g.kind.map(kind_type));
        o.opt(vocab::EMAIL, g.email.as_ref());
        o.attrs(&g.attributes);
        o.stub(doc, &g.id);
        o
    });
    section(
        &mut root,
        "activityDescription",
        doc.descriptions.iter().map(|(k, v)| (k.to_string(), v)),
        |d: &ActivityDescription| {
            let mut o = Obj::new();
            if !d.name.is_empty() {
                o.set(vocab::NAME, d.name.clone());
            }
            o.opt(vocab::VERSION, d.version.as_ref());
            o.opt(vocab::DOC, d.doc.as_ref());
            o.opt(vocab::DOCURL, d.docurl.as_ref());
            if let Some(c) = &d.code_reference {
                o.set(vocab::CODE_REF, c.uri.clone());
                o.opt(vocab::CODE_REVISION, c.revision.as_ref());
            }
            o.stub(doc, &d.id);
            o
        },
    );
    section(&mut root, "parameter", numbered("p", doc.parameters.values()), |p: &Parameter| {
        let mut o = Obj::new();
        o.set(vocab::ACTIVITY, p.activity.to_string());
        o.set(vocab::NAME, p.name.clone());
        o.set(vocab::VALUE, p.value.clone());
        o.set(vocab::VALUE_TYPE, p.value_type.as_str());
        o
    });
    section(&mut root, "used", numbered("u", doc.used.values()), |u: &Used| {
        let mut o = Obj::new();
        o.set(vocab::ACTIVITY, u.activity.to_string());
        o.set(vocab::ENTITY, u.entity.to_string());
        o.opt(vocab::ROLE, u.role.as_ref());
        o.opt(vocab::TIME, u.time.as_ref());
        o
    });
    section(&mut root, "wasGeneratedBy", numbered("g", doc.generations.values()), |g: &WasGeneratedBy| {
        let mut o = Obj::new();
        o.set(vocab::ENTITY, g.entity.to_string());
        o.set(vocab::ACTIVITY, g.activity.to_string());
        o.opt(vocab::ROLE, g.role.as_ref());
        o.opt(vocab::TIME, g.time.as_ref());
        o
    });
    section(
        &mut root,
        "wasAssociatedWith",
        numbered("as", doc.associations.values()),
        |a: &WasAssociatedWith| {
            let mut o = Obj::new();
            o.set(vocab::ACTIVITY, a.activity.to_string());
            o.set(vocab::AGENT, a.agent.to_string());
            o.opt(vocab::ROLE, a.role.as_ref());
            o
        },
    );
    section(
        &mut root,
        "wasAttributedTo",
        numbered("at", doc.attributions.values()),
        |a: &WasAttributedTo| {
            let mut o = Obj::new();
            o.set(vocab::ENTITY, a.entity.to_string());
            o.set(vocab::AGENT, a.agent.to_string());
            o.opt(vocab::ROLE, a.role.as_ref());
            o
        },
    );

    let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("JSON values serialize");
    text.push('\n');
    text
}

/// String-valued fields of one record, consumed key by key; whatever is
/// left over becomes user attributes.
struct Fields {
    id: String,
    map: BTreeMap<String, String>,
}

impl Fields {
    fn new(id: &str, value: &Value) -> Result<Self, SerializeError> {
        let obj = value.as_object().ok_or_else(|| bad(id, "record is not an object"))?;
        let mut map = BTreeMap::new();
        for (k, v) in obj {
            let text = match v {
                Value::String(s) => s.clone(),
                // typed literal {"$": value, "type": ...}
                Value::Object(o) => match o.get("$") {
                    Some(Value::String(s)) => s.clone(),
                    _ => return Err(bad(id, &format!("attribute {k} has an unsupported value"))),
                },
                Value::Number(n) => n.to_string(),
                Value::Bool(b) => b.to_string(),
                _ => return Err(bad(id, &format!("attribute {k} has an unsupported value"))),
            };
            map.insert(k.clone(), text);
        }
        Ok(Fields { id: id.to_owned(), map })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<String, SerializeError> {
        self.take(key).ok_or_else(|| bad(&self.id, &format!("missing {key}")))
    }

    fn take_id(&mut self, key: &str, ns: &Namespaces) -> Result<Option<QualifiedId>, SerializeError> {
        match self.take(key) {
            None => Ok(None),
            Some(text) => ns
                .parse_id(&text)
                .map(Some)
                .map_err(|e| bad(&self.id, &format!("{key}: {e}"))),
        }
    }

    fn require_id(&mut self, key: &str, ns: &Namespaces) -> Result<QualifiedId, SerializeError> {
        self.take_id(key, ns)?
            .ok_or_else(|| bad(&self.id, &format!("missing {key}")))
    }

    fn take_time(&mut self, key: &str) -> Result<Option<Timestamp>, SerializeError> {
        match self.take(key) {
            None => Ok(None),
            Some(text) => Timestamp::parse(&text)
                .map(Some)
                .map_err(|e| bad(&self.id, &format!("{key}: {e}"))),
        }
    }

    fn take_stub(&mut self) -> Result<bool, SerializeError> {
        match self.take(vocab::STUB).as_deref() {
            None | Some("false") => Ok(false),
            Some("true") => Ok(true),
            Some(other) => Err(bad(&self.id, &format!("{} must be true or false, got {other:?}", vocab::STUB))),
        }
    }

    fn into_attributes(self) -> Attributes {
        self.map
    }

    /// For relations and parameters, which carry no free attributes.
    fn finish(self) -> Result<(), SerializeError> {
        match self.map.keys().next() {
            None => Ok(()),
            Some(k) => Err(bad(&self.id, &format!("unexpected key {k}"))),
        }
    }
}

fn bad(id: &str, detail: &str) -> SerializeError {
    SerializeError::BadRecord {
        id: id.to_owned(),
        detail: detail.to_owned(),
    }
}

fn model_err(id: &str, e: crate::model::ModelError) -> SerializeError {
    bad(id, &e.to_string())
}

fn read_namespaces(value: Option<&Value>, defaults: &Namespaces) -> Result<Namespaces, SerializeError> {
    let Some(value) = value else {
        return Ok(defaults.clone());
    };
    let obj = value
        .as_object()
        .ok_or_else(|| bad("prefix", "prefix section is not an object"))?;
    let mut ns = defaults.clone();
    let mut default_uri = None;
    for (p, v) in obj {
        let uri = v
            .as_str()
            .ok_or_else(|| bad("prefix", &format!("URI of {p} is not a string")))?;
        if p == "default" {
            default_uri = Some(uri.to_owned());
        } else {
            ns.insert(p, uri).map_err(|e| model_err("prefix", e))?;
        }
    }
    if let Some(uri) = default_uri {
        if ns.uri(ns.default_prefix()) != Some(uri.as_str()) {
            let prefix = ns
                .iter()
                .find(|(_, u)| *u == uri)
                .map(|(p, _)| p.to_owned())
                .ok_or_else(|| bad("prefix", &format!("default namespace {uri} has no prefix")))?;
            let map = ns.iter().map(|(p, u)| (p.to_owned(), u.to_owned())).collect();
            ns = Namespaces::from_map(&prefix, map).map_err(|e| model_err("prefix", e))?;
        }
    }
    Ok(ns)
}

fn entries(value: &Value, section: &str) -> Result<Vec<(String, Value)>, SerializeError> {
    let obj = value
        .as_object()
        .ok_or_else(|| bad(section, "section is not an object"))?;
    Ok(obj.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
}

/// Parses PROV-JSON as written by [`to_prov_json`]. Prefixes in `defaults`
/// are available in addition to those declared in the text. Unknown keys
/// on entities, activities and agents become attributes; unknown sections
/// are rejected.
pub fn from_prov_json(text: &str, defaults: &Namespaces) -> Result<ProvenanceDocument, SerializeError> {
    let root: Value = serde_json::from_str(text).map_err(|e| SerializeError::MalformedJson(e.to_string()))?;
    let root = root
        .as_object()
        .ok_or_else(|| SerializeError::MalformedJson("top level is not an object".into()))?;
    if let Some(unknown) = root.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
        return Err(SerializeError::UnknownSection(unknown.clone()));
    }

    let ns = read_namespaces(root.get("prefix"), defaults)?;
    let mut doc = ProvenanceDocument::new(ns.clone());
    let parse_key = |key: &str| ns.parse_id(key).map_err(|e| model_err(key, e));
    let empty = Value::Object(Map::new());
    let sec = |name: &str| entries(root.get(name).unwrap_or(&empty), name);

    for (key, value) in sec("entity")? {
        let mut f = Fields::new(&key, &value)?;
        let mut e = Entity::new(parse_key(&key)?);
        e.name = f.take(vocab::LABEL);
        e.location = f.take(vocab::LOCATION);
        e.generated_at = f.take_time(vocab::GENERATED_AT)?;
        e.comment = f.take(vocab::COMMENT);
        let stub = f.take_stub()?;
        e.attributes = f.into_attributes();
        let id = e.id.clone();
        doc.add_entity(e).map_err(|e| model_err(&key, e))?;
        if stub {
            doc.incomplete_ids.insert(id);
        }
    }
    for (key, value) in sec("activity")? {
        let mut f = Fields::new(&key, &value)?;
        let mut a = Activity::new(parse_key(&key)?);
        a.name = f.take(vocab::LABEL);
        a.start_time = f.take_time(vocab::START_TIME)?;
        a.end_time = f.take_time(vocab::END_TIME)?;
        a.description_ref = f.take_id(vocab::DESCRIPTION, &ns)?;
        a.comment = f.take(vocab::COMMENT);
        let stub = f.take_stub()?;
        a.attributes = f.into_attributes();
        let id = a.id.clone();
        doc.add_activity(a).map_err(|e| model_err(&key, e))?;
        if stub {
            doc.incomplete_ids.insert(id);
        }
    }
    for (key, value) in sec("agent")? {
        let mut f = Fields::new(&key, &value)?;
        let mut g = Agent::stub(parse_key(&key)?);
        g.name = f.take(vocab::LABEL).unwrap_or_default();
        g.kind = match f.take(vocab::TYPE).as_deref() {
            None => None,
            Some(PROV_PERSON) => Some(AgentKind::Person),
            Some(PROV_ORGANIZATION) => Some(AgentKind::Organization),
            Some(PROV_SOFTWARE) => Some(AgentKind::SoftwareAgent),
            Some(other) => return Err(bad(&key, &format!("unknown agent type {other:?}"))),
        };
        g.email = f.take(vocab::EMAIL);
        let stub = f.take_stub()?;
        g.attributes = f.into_attributes();
        let id = g.id.clone();
        doc.add_agent(g).map_err(|e| model_err(&key, e))?;
        if stub {
            doc.incomplete_ids.insert(id);
        }
    }
    for (key, value) in sec("activityDescription")? {
        let mut f = Fields::new(&key, &value)?;
        let mut d = ActivityDescription::new(parse_key(&key)?, "");
        d.name = f.take(vocab::NAME).unwrap_or_default();
        d.version = f.take(vocab::VERSION);
        d.doc = f.take(vocab::DOC);
        d.docurl = f.take(vocab::DOCURL);
        let revision = f.take(vocab::CODE_REVISION);
        d.code_reference = match f.take(vocab::CODE_REF) {
            Some(uri) => Some(CodeReference { uri, revision }),
            None if revision.is_some() => return Err(bad(&key, "code revision without code reference")),
            None => None,
        };
        let stub = f.take_stub()?;
        f.finish()?;
        let id = d.id.clone();
        doc.add_description(d).map_err(|e| model_err(&key, e))?;
        if stub {
            doc.incomplete_ids.insert(id);
        }
    }
    for (key, value) in sec("parameter")? {
        let mut f = Fields::new(&key, &value)?;
        let activity = f.require_id(vocab::ACTIVITY, &ns)?;
        let name = f.require(vocab::NAME)?;
        let value = f.require(vocab::VALUE)?;
        let value_type: ValueType = f
            .require(vocab::VALUE_TYPE)?
            .parse()
            .map_err(|e: crate::model::ModelError| model_err(&key, e))?;
        f.finish()?;
        doc.add_parameter(Parameter::new(activity, &name, &value, value_type))
            .map_err(|e| model_err(&key, e))?;
    }
    for (key, value) in sec("used")? {
        let mut f = Fields::new(&key, &value)?;
        let mut u = Used::new(f.require_id(vocab::ACTIVITY, &ns)?, f.require_id(vocab::ENTITY, &ns)?);
        u.role = f.take(vocab::ROLE);
        u.time = f.take_time(vocab::TIME)?;
        f.finish()?;
        doc.add_used(u).map_err(|e| model_err(&key, e))?;
    }
    for (key, value) in sec("wasGeneratedBy")? {
        let mut f = Fields::new(&key, &value)?;
        let mut g = WasGeneratedBy::new(f.require_id(vocab::ENTITY, &ns)?, f.require_id(vocab::ACTIVITY, &ns)?);
        g.role = f.take(vocab::ROLE);
        g.time = f.take_time(vocab::TIME)?;
        f.finish()?;
        doc.add_generation(g).map_err(|e| model_err(&key, e))?;
    }
    for (key, value) in sec("wasAssociatedWith")? {
        let mut f = Fields::new(&key, &value)?;
        let mut a = WasAssociatedWith::new(f.require_id(vocab::ACTIVITY, &ns)?, f.require_id(vocab::AGENT, &ns)?);
        a.role = f.take(vocab::ROLE);
        f.finish()?;
        doc.add_association(a).map_err(|e| model_err(&key, e))?;
    }
    for (key, value) in sec("wasAttributedTo")? {
        let mut f = Fields::new(&key, &value)?;
        let mut a = WasAttributedTo::new(f.require_id(vocab::ENTITY, &ns)?, f.require_id(vocab::AGENT, &ns)?);
        a.role = f.take(vocab::ROLE);
        f.finish()?;
        doc.add_attribution(a).map_err(|e| model_err(&key, e))?;
    }
    Ok(doc)
}
