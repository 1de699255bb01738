use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ModelError, QualifiedId};

pub type Attributes = BTreeMap<String, String>;

/// A UTC instant. Parsed from any RFC 3339 / ISO-8601 offset form and always
/// rendered in normalized `...Z` form.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

impl Timestamp {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        DateTime::parse_from_rfc3339(text.trim())
            .map(|t| Timestamp(t.with_timezone(&Utc)))
            .map_err(|e| ModelError::BadTimestamp(format!("{text}: {e}")))
    }

    pub fn now() -> Self {
        Timestamp(Utc::now())
    }

    pub fn from_datetime(t: DateTime<Utc>) -> Self {
        Timestamp(t)
    }

    pub fn as_datetime(&self) -> DateTime<Utc> {
        self.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.to_rfc3339_opts(SecondsFormat::AutoSi, true))
    }
}

impl fmt::Debug for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Timestamp {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Timestamp::parse(s)
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Timestamp::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: QualifiedId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: Attributes,
}

impl Entity {
    pub fn new(id: QualifiedId) -> Self {
        Entity {
            id,
            name: None,
            location: None,
            generated_at: None,
            comment: None,
            attributes: Attributes::new(),
        }
    }

    pub fn named(id: QualifiedId, name: &str) -> Self {
        Entity {
            name: Some(name.to_owned()),
            ..Entity::new(id)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Activity {
    pub id: QualifiedId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_time: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_time: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description_ref: Option<QualifiedId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: Attributes,
}

impl Activity {
    pub fn new(id: QualifiedId) -> Self {
        Activity {
            id,
            name: None,
            start_time: None,
            end_time: None,
            description_ref: None,
            comment: None,
            attributes: Attributes::new(),
        }
    }

    pub fn named(id: QualifiedId, name: &str) -> Self {
        Activity {
            name: Some(name.to_owned()),
            ..Activity::new(id)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgentKind {
    Person,
    Organization,
    SoftwareAgent,
}

impl AgentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AgentKind::Person => "Person",
            AgentKind::Organization => "Organization",
            AgentKind::SoftwareAgent => "SoftwareAgent",
        }
    }
}

impl FromStr for AgentKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Person" => Ok(AgentKind::Person),
            "Organization" => Ok(AgentKind::Organization),
            "SoftwareAgent" => Ok(AgentKind::SoftwareAgent),
            other => Err(ModelError::BadValue {
                field: "kind",
                value: other.to_owned(),
            }),
        }
    }
}

/// A responsible party. `name` may only be empty on stub agents, and `kind`
/// is absent when the source (a file header, a dangling reference) did not
/// say.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agent {
    pub id: QualifiedId,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<AgentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub email: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: Attributes,
}

impl Agent {
    pub fn new(id: QualifiedId, name: &str, kind: AgentKind) -> Self {
        Agent {
            id,
            name: name.to_owned(),
            kind: Some(kind),
            email: None,
            attributes: Attributes::new(),
        }
    }

    pub fn stub(id: QualifiedId) -> Self {
        Agent {
            id,
            name: String::new(),
            kind: None,
            email: None,
            attributes: Attributes::new(),
        }
    }
}

/// Pointer to the code implementing an activity description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeReference {
    pub uri: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revision: Option<String>,
}

impl CodeReference {
    /// `uri` or `uri@revision`.
    pub fn render(&self) -> String {
        match &self.revision {
            Some(rev) => format!("{}@{}", self.uri, rev),
            None => self.uri.clone(),
        }
    }

    /// Inverse of [`CodeReference::render`]; the revision is whatever follows
    /// the last `@` after the final `/`.
    pub fn parse(text: &str) -> Self {
        let tail_start = text.rfind('/').map_or(0, |i| i + 1);
        match text[tail_start..].rfind('@') {
            Some(at) => CodeReference {
                uri: text[..tail_start + at].to_owned(),
                revision: Some(text[tail_start + at + 1..].to_owned()),
            },
            None => CodeReference {
                uri: text.to_owned(),
                revision: None,
            },
        }
    }
}

/// Static description of the method or software behind activities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityDescription {
    pub id: QualifiedId,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub docurl: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code_reference: Option<CodeReference>,
}

impl ActivityDescription {
    pub fn new(id: QualifiedId, name: &str) -> Self {
        ActivityDescription {
            id,
            name: name.to_owned(),
            version: None,
            doc: None,
            docurl: None,
            code_reference: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    String,
    Integer,
    Real,
    Boolean,
    Timestamp,
}

impl ValueType {
    pub fn as_str(&self) -> &'static str {
        match self {
            ValueType::String => "string",
            ValueType::Integer => "integer",
            ValueType::Real => "real",
            ValueType::Boolean => "boolean",
            ValueType::Timestamp => "timestamp",
        }
    }

    pub fn accepts(&self, value: &str) -> bool {
        match self {
            ValueType::String => true,
            ValueType::Integer => value.parse::<i64>().is_ok(),
            ValueType::Real => value.parse::<f64>().is_ok(),
            ValueType::Boolean => matches!(value, "true" | "false"),
            ValueType::Timestamp => Timestamp::parse(value).is_ok(),
        }
    }
}

impl FromStr for ValueType {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "string" => Ok(ValueType::String),
            "integer" => Ok(ValueType::Integer),
            "real" => Ok(ValueType::Real),
            "boolean" => Ok(ValueType::Boolean),
            "timestamp" => Ok(ValueType::Timestamp),
            other => Err(ModelError::BadValue {
                field: "value_type",
                value: other.to_owned(),
            }),
        }
    }
}

/// One configuration value of an activity execution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameter {
    pub activity: QualifiedId,
    pub name: String,
    pub value: String,
    pub value_type: ValueType,
}

impl Parameter {
    pub fn new(activity: QualifiedId, name: &str, value: &str, value_type: ValueType) -> Self {
        Parameter {
            activity,
            name: name.to_owned(),
            value: value.to_owned(),
            value_type,
        }
    }

    pub fn key(&self) -> (QualifiedId, String) {
        (self.activity.clone(), self.name.clone())
    }
}

/// Identity of a relation: subject, object, role. Two relations with the same
/// key are the same relation.
pub type RelationKey = (QualifiedId, QualifiedId, Option<String>);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Used {
    pub activity: QualifiedId,
    pub entity: QualifiedId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<Timestamp>,
}

impl Used {
    pub fn new(activity: QualifiedId, entity: QualifiedId) -> Self {
        Used {
            activity,
            entity,
            role: None,
            time: None,
        }
    }

    pub fn key(&self) -> RelationKey {
        (self.activity.clone(), self.entity.clone(), self.role.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WasGeneratedBy {
    pub entity: QualifiedId,
    pub activity: QualifiedId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<Timestamp>,
}

impl WasGeneratedBy {
    pub fn new(entity: QualifiedId, activity: QualifiedId) -> Self {
        WasGeneratedBy {
            entity,
            activity,
            role: None,
            time: None,
        }
    }

    pub fn key(&self) -> RelationKey {
        (self.entity.clone(), self.activity.clone(), self.role.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WasAssociatedWith {
    pub activity: QualifiedId,
    pub agent: QualifiedId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
}

impl WasAssociatedWith {
    pub fn new(activity: QualifiedId, agent: QualifiedId) -> Self {
        WasAssociatedWith {
            activity,
            agent,
            role: None,
        }
    }

    pub fn key(&self) -> RelationKey {
        (self.activity.clone(), self.agent.clone(), self.role.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WasAttributedTo {
    pub entity: QualifiedId,
    pub agent: QualifiedId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
}

impl WasAttributedTo {
    pub fn new(entity: QualifiedId, agent: QualifiedId) -> Self {
        WasAttributedTo {
            entity,
            agent,
            role: None,
        }
    }

    pub fn key(&self) -> RelationKey {
        (self.entity.clone(), self.agent.clone(), self.role.clone())
    }
}

/// The record classes sharing the document id space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RecordClass {
    Entity,
    Activity,
    Agent,
    ActivityDescription,
}

impl RecordClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecordClass::Entity => "entity",
            RecordClass::Activity => "activity",
            RecordClass::Agent => "agent",
            RecordClass::ActivityDescription => "activityDescription",
        }
    }
}

impl fmt::Display for RecordClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Any identified record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Record {
    Entity(Entity),
    Activity(Activity),
    Agent(Agent),
    ActivityDescription(ActivityDescription),
}

impl Record {
    pub fn class(&self) -> RecordClass {
        match self {
            Record::Entity(_) => RecordClass::Entity,
            Record::Activity(_) => RecordClass::Activity,
            Record::Agent(_) => RecordClass::Agent,
            Record::ActivityDescription(_) => RecordClass::ActivityDescription,
        }
    }

    pub fn id(&self) -> &QualifiedId {
        match self {
            Record::Entity(r) => &r.id,
            Record::Activity(r) => &r.id,
            Record::Agent(r) => &r.id,
            Record::ActivityDescription(r) => &r.id,
        }
    }
}
