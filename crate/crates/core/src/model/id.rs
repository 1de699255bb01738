use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ModelError;

pub const PROV_PREFIX: &str = "prov";
pub const PROV_URI: &str = "http://www.w3.org/ns/prov#";
pub const VOPROV_PREFIX: &str = "voprov";
pub const VOPROV_URI: &str = "http://www.ivoa.net/documents/ProvenanceDM/ns/voprov/";
pub const DEFAULT_PREFIX: &str = "ex";
pub const DEFAULT_URI: &str = "http://example.org/";

/// A `prefix:local` name.
///
/// Ordering follows the rendered form so that sorting ids and sorting their
/// string renderings always agree.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QualifiedId {
    prefix: String,
    local: String,
}

fn valid_prefix(prefix: &str) -> bool {
    !prefix.is_empty()
        && prefix
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

fn valid_local(local: &str) -> bool {
    !local.is_empty()
        && local.chars().all(|c| {
            !c.is_whitespace()
                && !c.is_control()
                && !matches!(c, '"' | '\'' | '\\' | '(' | ')' | ',' | ';' | '[' | ']' | '<' | '>' | '=' | '&')
        })
}

impl QualifiedId {
    pub fn new(prefix: impl Into<String>, local: impl Into<String>) -> Result<Self, ModelError> {
        let prefix = prefix.into();
        let local = local.into();
        if !valid_prefix(&prefix) || !valid_local(&local) {
            return Err(ModelError::MalformedId(format!("{prefix}:{local}")));
        }
        Ok(QualifiedId { prefix, local })
    }

    /// Parses an already-rendered id. A prefix is mandatory; no namespace
    /// lookup is performed.
    pub fn from_rendered(text: &str) -> Result<Self, ModelError> {
        if text.is_empty() {
            return Err(ModelError::EmptyId);
        }
        match text.split_once(':') {
            Some((prefix, local)) => QualifiedId::new(prefix, local),
            None => Err(ModelError::MalformedId(text.to_owned())),
        }
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn local(&self) -> &str {
        &self.local
    }

    fn rendered_bytes(&self) -> impl Iterator<Item = u8> + '_ {
        self.prefix
            .bytes()
            .chain(std::iter::once(b':'))
            .chain(self.local.bytes())
    }
}

impl Ord for QualifiedId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rendered_bytes().cmp(other.rendered_bytes())
    }
}

impl PartialOrd for QualifiedId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for QualifiedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prefix, self.local)
    }
}

impl fmt::Debug for QualifiedId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for QualifiedId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QualifiedId::from_rendered(s)
    }
}

impl Serialize for QualifiedId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QualifiedId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        QualifiedId::from_rendered(&text).map_err(serde::de::Error::custom)
    }
}

/// Prefix to URI map plus the deployment's default prefix, which is applied
/// to ids written without one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Namespaces {
    default_prefix: String,
    map: BTreeMap<String, String>,
}

impl Default for Namespaces {
    fn default() -> Self {
        Namespaces::with_default(DEFAULT_PREFIX, DEFAULT_URI)
    }
}

impl Namespaces {
    /// Namespaces holding `prov`, `voprov` and the given default prefix.
    pub fn with_default(prefix: &str, uri: &str) -> Self {
        let mut map = BTreeMap::new();
        map.insert(PROV_PREFIX.to_owned(), PROV_URI.to_owned());
        map.insert(VOPROV_PREFIX.to_owned(), VOPROV_URI.to_owned());
        map.insert(prefix.to_owned(), uri.to_owned());
        Namespaces {
            default_prefix: prefix.to_owned(),
            map,
        }
    }

    /// Builds a namespace set from an explicit map. The map must already
    /// contain `prov` and `default_prefix`.
    pub fn from_map(default_prefix: &str, map: BTreeMap<String, String>) -> Result<Self, ModelError> {
        for required in [PROV_PREFIX, default_prefix] {
            if !map.contains_key(required) {
                return Err(ModelError::UnknownPrefix(required.to_owned()));
            }
        }
        Ok(Namespaces {
            default_prefix: default_prefix.to_owned(),
            map,
        })
    }

    pub fn default_prefix(&self) -> &str {
        &self.default_prefix
    }

    pub fn contains(&self, prefix: &str) -> bool {
        self.map.contains_key(prefix)
    }

    pub fn uri(&self, prefix: &str) -> Option<&str> {
        self.map.get(prefix).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Adds or confirms a prefix. Rebinding a prefix to a different URI fails.
    pub fn insert(&mut self, prefix: &str, uri: &str) -> Result<(), ModelError> {
        if !valid_prefix(prefix) {
            return Err(ModelError::MalformedId(format!("{prefix}:")));
        }
        match self.map.get(prefix) {
            Some(existing) if existing != uri => Err(ModelError::ConflictingNamespace(prefix.to_owned())),
            Some(_) => Ok(()),
            None => {
                self.map.insert(prefix.to_owned(), uri.to_owned());
                Ok(())
            }
        }
    }

    /// Union of two namespace sets; the default prefix of `self` wins.
    pub fn union(&self, other: &Namespaces) -> Result<Namespaces, ModelError> {
        let mut out = self.clone();
        for (prefix, uri) in other.iter() {
            out.insert(prefix, uri)?;
        }
        Ok(out)
    }

    pub fn parse_id(&self, text: &str) -> Result<QualifiedId, ModelError> {
        parse_qualified_id(text, self)
    }
}

/// Splits `text` on its first colon. Text without a colon gets the default
/// prefix. The prefix must be declared in `namespaces`.
pub fn parse_qualified_id(text: &str, namespaces: &Namespaces) -> Result<QualifiedId, ModelError> {
    if text.is_empty() {
        return Err(ModelError::EmptyId);
    }
    let (prefix, local) = match text.split_once(':') {
        Some((prefix, local)) => (prefix, local),
        None => (namespaces.default_prefix(), text),
    };
    if prefix.is_empty() || local.is_empty() {
        return Err(ModelError::MalformedId(text.to_owned()));
    }
    if !namespaces.contains(prefix) {
        return Err(ModelError::UnknownPrefix(prefix.to_owned()));
    }
    QualifiedId::new(prefix, local)
}
