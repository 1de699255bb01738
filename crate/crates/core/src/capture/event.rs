use std::fmt;
use std::str::FromStr;

use serde_json::{Map, Value};

use super::CaptureError;
use crate::model::{
    parse_qualified_id, AgentKind, Attributes, Namespaces, QualifiedId, Timestamp, ValueType,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    ActivityStart,
    ActivityEnd,
    Used,
    Generated,
    Entity,
    Agent,
    Association,
    Attribution,
    Parameter,
    Description,
}

impl EventKind {
    pub const ALL: [EventKind; 10] = [
        EventKind::ActivityStart,
        EventKind::ActivityEnd,
        EventKind::Used,
        EventKind::Generated,
        EventKind::Entity,
        EventKind::Agent,
        EventKind::Association,
        EventKind::Attribution,
        EventKind::Parameter,
        EventKind::Description,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::ActivityStart => "activity_start",
            EventKind::ActivityEnd => "activity_end",
            EventKind::Used => "used",
            EventKind::Generated => "generated",
            EventKind::Entity => "entity",
            EventKind::Agent => "agent",
            EventKind::Association => "association",
            EventKind::Attribution => "attribution",
            EventKind::Parameter => "parameter",
            EventKind::Description => "description",
        }
    }

    /// Mandatory keys, then optional keys.
    fn fields(&self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            EventKind::ActivityStart => (&["activity_id", "name", "time"], &["description_ref"]),
            EventKind::ActivityEnd => (&["activity_id", "time"], &[]),
            EventKind::Used | EventKind::Generated => (&["activity_id", "entity_id"], &["role", "time"]),
            EventKind::Entity => (&["entity_id"], &["name", "location"]),
            EventKind::Agent => (&["agent_id", "name", "kind"], &["email"]),
            EventKind::Association => (&["activity_id", "agent_id"], &["role"]),
            EventKind::Attribution => (&["entity_id", "agent_id"], &["role"]),
            EventKind::Parameter => (&["activity_id", "name", "value", "value_type"], &[]),
            EventKind::Description => (
                &["description_id", "name"],
                &["version", "doc", "docurl", "code_ref", "code_revision"],
            ),
        }
    }

    fn is_known_field(&self, key: &str) -> bool {
        let (mandatory, optional) = self.fields();
        key == "event" || mandatory.contains(&key) || optional.contains(&key)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = CaptureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| CaptureError::UnknownEventKind(s.to_owned()))
    }
}

/// Typed content of one capture event.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventPayload {
    ActivityStart {
        activity_id: QualifiedId,
        name: String,
        time: Timestamp,
        description_ref: Option<QualifiedId>,
    },
    ActivityEnd {
        activity_id: QualifiedId,
        time: Timestamp,
    },
    Used {
        activity_id: QualifiedId,
        entity_id: QualifiedId,
        role: Option<String>,
        time: Option<Timestamp>,
    },
    Generated {
        activity_id: QualifiedId,
        entity_id: QualifiedId,
        role: Option<String>,
        time: Option<Timestamp>,
    },
    Entity {
        entity_id: QualifiedId,
        name: Option<String>,
        location: Option<String>,
    },
    Agent {
        agent_id: QualifiedId,
        name: String,
        kind: AgentKind,
        email: Option<String>,
    },
    Association {
        activity_id: QualifiedId,
        agent_id: QualifiedId,
        role: Option<String>,
    },
    Attribution {
        entity_id: QualifiedId,
        agent_id: QualifiedId,
        role: Option<String>,
    },
    Parameter {
        activity_id: QualifiedId,
        name: String,
        value: String,
        value_type: ValueType,
    },
    Description {
        description_id: QualifiedId,
        name: String,
        version: Option<String>,
        doc: Option<String>,
        docurl: Option<String>,
        code_ref: Option<String>,
        code_revision: Option<String>,
    },
}

/// One structured log line. Keys outside the kind's schema are kept in
/// `extra` and end up in the target record's attributes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaptureEvent {
    pub payload: EventPayload,
    pub extra: Attributes,
}

impl From<EventPayload> for CaptureEvent {
    fn from(payload: EventPayload) -> Self {
        CaptureEvent {
            payload,
            extra: Attributes::new(),
        }
    }
}

struct Fields<'a> {
    kind: EventKind,
    object: &'a Map<String, Value>,
    namespaces: &'a Namespaces,
}

impl Fields<'_> {
    fn invalid(&self, field: &str, detail: impl fmt::Display) -> CaptureError {
        CaptureError::InvalidField {
            kind: self.kind.as_str().to_owned(),
            field: field.to_owned(),
            detail: detail.to_string(),
        }
    }

    fn opt_str(&self, field: &str) -> Result<Option<String>, CaptureError> {
        match self.object.get(field) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(other) => Err(self.invalid(field, format!("expected a string, found {other}"))),
        }
    }

    fn str(&self, field: &str) -> Result<String, CaptureError> {
        self.opt_str(field)?.ok_or_else(|| CaptureError::MissingField {
            kind: self.kind.as_str().to_owned(),
            field: field.to_owned(),
        })
    }

    fn id(&self, field: &str) -> Result<QualifiedId, CaptureError> {
        let text = self.str(field)?;
        parse_qualified_id(&text, self.namespaces).map_err(|e| self.invalid(field, e))
    }

    fn opt_id(&self, field: &str) -> Result<Option<QualifiedId>, CaptureError> {
        self.opt_str(field)?
            .map(|t| parse_qualified_id(&t, self.namespaces).map_err(|e| self.invalid(field, e)))
            .transpose()
    }

    fn time(&self, field: &str) -> Result<Timestamp, CaptureError> {
        Timestamp::parse(&self.str(field)?).map_err(|e| self.invalid(field, e))
    }

    fn opt_time(&self, field: &str) -> Result<Option<Timestamp>, CaptureError> {
        self.opt_str(field)?
            .map(|t| Timestamp::parse(&t).map_err(|e| self.invalid(field, e)))
            .transpose()
    }

    fn parsed<T: FromStr>(&self, field: &str) -> Result<T, CaptureError>
    where
        T::Err: fmt::Display,
    {
        self.str(field)?.parse().map_err(|e| self.invalid(field, e))
    }
}

/// Parses one JSON-lines capture event.
pub fn parse_event_line(line: &str, namespaces: &Namespaces) -> Result<CaptureEvent, CaptureError> {
    let value: Value = serde_json::from_str(line).map_err(|e| CaptureError::MalformedJson(e.to_string()))?;
    let Value::Object(object) = value else {
        return Err(CaptureError::MalformedJson("event line is not a JSON object".into()));
    };
    let kind: EventKind = match object.get("event") {
        Some(Value::String(kind)) => kind.parse()?,
        Some(other) => return Err(CaptureError::UnknownEventKind(other.to_string())),
        None => {
            return Err(CaptureError::MissingField {
                kind: String::new(),
                field: "event".into(),
            })
        }
    };
    let f = Fields {
        kind,
        object: &object,
        namespaces,
    };
    // mandatory fields are checked first, in schema order, so the reported
    // missing field does not depend on which optional fields are malformed
    for field in kind.fields().0 {
        f.str(field)?;
    }
    let payload = match kind {
        EventKind::ActivityStart => EventPayload::ActivityStart {
            activity_id: f.id("activity_id")?,
            name: f.str("name")?,
            time: f.time("time")?,
            description_ref: f.opt_id("description_ref")?,
        },
        EventKind::ActivityEnd => EventPayload::ActivityEnd {
            activity_id: f.id("activity_id")?,
            time: f.time("time")?,
        },
        EventKind::Used => EventPayload::Used {
            activity_id: f.id("activity_id")?,
            entity_id: f.id("entity_id")?,
            role: f.opt_str("role")?,
            time: f.opt_time("time")?,
        },
        EventKind::Generated => EventPayload::Generated {
            activity_id: f.id("activity_id")?,
            entity_id: f.id("entity_id")?,
            role: f.opt_str("role")?,
            time: f.opt_time("time")?,
        },
        EventKind::Entity => EventPayload::Entity {
            entity_id: f.id("entity_id")?,
            name: f.opt_str("name")?,
            location: f.opt_str("location")?,
        },
        EventKind::Agent => {
            let name = f.str("name")?;
            if name.is_empty() {
                return Err(f.invalid("name", "agent name is empty"));
            }
            EventPayload::Agent {
                agent_id: f.id("agent_id")?,
                name,
                kind: f.parsed("kind")?,
                email: f.opt_str("email")?,
            }
        }
        EventKind::Association => EventPayload::Association {
            activity_id: f.id("activity_id")?,
            agent_id: f.id("agent_id")?,
            role: f.opt_str("role")?,
        },
        EventKind::Attribution => EventPayload::Attribution {
            entity_id: f.id("entity_id")?,
            agent_id: f.id("agent_id")?,
            role: f.opt_str("role")?,
        },
        EventKind::Parameter => {
            let value_type: ValueType = f.parsed("value_type")?;
            let value = f.str("value")?;
            if !value_type.accepts(&value) {
                return Err(f.invalid("value", format!("{value:?} is not a valid {}", value_type.as_str())));
            }
            EventPayload::Parameter {
                activity_id: f.id("activity_id")?,
                name: f.str("name")?,
                value,
                value_type,
            }
        }
        EventKind::Description => {
            let name = f.str("name")?;
            if name.is_empty() {
                return Err(f.invalid("name", "description name is empty"));
            }
            EventPayload::Description {
                description_id: f.id("description_id")?,
                name,
                version: f.opt_str("version")?,
                doc: f.opt_str("doc")?,
                docurl: f.opt_str("docurl")?,
                code_ref: f.opt_str("code_ref")?,
                code_revision: f.opt_str("code_revision")?,
            }
        }
    };
    let extra = object
        .iter()
        .filter(|(k, _)| !kind.is_known_field(k))
        .map(|(k, v)| {
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            (k.clone(), text)
        })
        .collect();
    Ok(CaptureEvent { payload, extra })
}

impl CaptureEvent {
    pub fn kind(&self) -> EventKind {
        match &self.payload {
            EventPayload::ActivityStart { .. } => EventKind::ActivityStart,
            EventPayload::ActivityEnd { .. } => EventKind::ActivityEnd,
            EventPayload::Used { .. } => EventKind::Used,
            EventPayload::Generated { .. } => EventKind::Generated,
            EventPayload::Entity { .. } => EventKind::Entity,
            EventPayload::Agent { .. } => EventKind::Agent,
            EventPayload::Association { .. } => EventKind::Association,
            EventPayload::Attribution { .. } => EventKind::Attribution,
            EventPayload::Parameter { .. } => EventKind::Parameter,
            EventPayload::Description { .. } => EventKind::Description,
        }
    }

    /// Serializes to one JSON line (no trailing newline) with sorted keys.
    pub fn to_line(&self) -> String {
        let kind = self.kind();
        let mut object = Map::new();
        for (k, v) in &self.extra {
            if !kind.is_known_field(k) {
                object.insert(k.clone(), Value::String(v.clone()));
            }
        }
        object.insert("event".to_owned(), Value::String(kind.as_str().to_owned()));
        let mut put_opt = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                object.insert(key.to_owned(), Value::String(v));
            }
        };
        match &self.payload {
            EventPayload::ActivityStart {
                activity_id,
                name,
                time,
                description_ref,
            } => {
                put_opt("activity_id", Some(activity_id.to_string()));
                put_opt("name", Some(name.clone()));
                put_opt("time", Some(time.to_string()));
                put_opt("description_ref", description_ref.as_ref().map(|d| d.to_string()));
            }
            EventPayload::ActivityEnd { activity_id, time } => {
                put_opt("activity_id", Some(activity_id.to_string()));
                put_opt("time", Some(time.to_string()));
            }
            EventPayload::Used {
                activity_id,
                entity_id,
                role,
                time,
            }
            | EventPayload::Generated {
                activity_id,
                entity_id,
                role,
                time,
            } => {
                put_opt("activity_id", Some(activity_id.to_string()));
                put_opt("entity_id", Some(entity_id.to_string()));
                put_opt("role", role.clone());
                put_opt("time", time.map(|t| t.to_string()));
            }
            EventPayload::Entity {
                entity_id,
                name,
                location,
            } => {
                put_opt("entity_id", Some(entity_id.to_string()));
                put_opt("name", name.clone());
                put_opt("location", location.clone());
            }
            EventPayload::Agent {
                agent_id,
                name,
                kind,
                email,
            } => {
                put_opt("agent_id", Some(agent_id.to_string()));
                put_opt("name", Some(name.clone()));
                put_opt("kind", Some(kind.as_str().to_owned()));
                put_opt("email", email.clone());
            }
            EventPayload::Association {
                activity_id,
                agent_id,
                role,
            } => {
                put_opt("activity_id", Some(activity_id.to_string()));
                put_opt("agent_id", Some(agent_id.to_string()));
                put_opt("role", role.clone());
            }
            EventPayload::Attribution {
                entity_id,
                agent_id,
                role,
            } => {
                put_opt("entity_id", Some(entity_id.to_string()));
                put_opt("agent_id", Some(agent_id.to_string()));
                put_opt("role", role.clone());
            }
            EventPayload::Parameter {
                activity_id,
                name,
                value,
                value_type,
            } => {
                put_opt("activity_id", Some(activity_id.to_string()));
                put_opt("name", Some(name.clone()));
                put_opt("value", Some(value.clone()));
                put_opt("value_type", Some(value_type.as_str().to_owned()));
            }
            EventPayload::Description {
                description_id,
                name,
                version,
                doc,
                docurl,
                code_ref,
                code_revision,
            } => {
                put_opt("description_id", Some(description_id.to_string()));
                put_opt("name", Some(name.clone()));
                put_opt("version", version.clone());
                put_opt("doc", doc.clone());
                put_opt("docurl", docurl.clone());
                put_opt("code_ref", code_ref.clone());
                put_opt("code_revision", code_revision.clone());
            }
        }
        Value::Object(object).to_string()
    }
}
