use std::collections::BTreeSet;

use url::form_urlencoded;

use crate::model::{ModelError, Namespaces, QualifiedId};
use crate::serialize::{parse_flag, DescriptionLevel, ModelFlavor, ProjectionOptions, SerializationFormat};
use crate::store::{Depth, Direction};

pub const PARAMETERS: [&str; 9] = [
    "ID",
    "DEPTH",
    "DIRECTION",
    "RESPONSEFORMAT",
    "MODEL",
    "AGENTS",
    "CONFIGURATION",
    "DESCRIPTIONS",
    "ATTRIBUTES",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProvSapRequest {
    pub id: QualifiedId,
    pub depth: Depth,
    pub direction: Direction,
    pub format: SerializationFormat,
    pub projection: ProjectionOptions,
}

impl ProvSapRequest {
    /// A request for `id` with every other parameter at its default.
    pub fn new(id: QualifiedId) -> Self {
        ProvSapRequest {
            id,
            depth: Depth::All,
            direction: Direction::Backward,
            format: SerializationFormat::ProvJson,
            projection: ProjectionOptions::default(),
        }
    }

    /// Canonical query string: all nine parameters in fixed order.
    pub fn to_query(&self) -> String {
        let flag = |b: bool| if b { "1" } else { "0" };
        let p = &self.projection;
        form_urlencoded::Serializer::new(String::new())
            .append_pair("ID", &self.id.to_string())
            .append_pair("DEPTH", &self.depth.to_string())
            .append_pair("DIRECTION", self.direction.as_str())
            .append_pair("RESPONSEFORMAT", self.format.as_str())
            .append_pair(
                "MODEL",
                match p.model {
                    ModelFlavor::Ivoa => "IVOA",
                    ModelFlavor::W3c => "W3C",
                },
            )
            .append_pair("AGENTS", flag(p.agents))
            .append_pair("CONFIGURATION", flag(p.configuration))
            .append_pair(
                "DESCRIPTIONS",
                match p.descriptions {
                    DescriptionLevel::None => "0",
                    DescriptionLevel::Reference => "1",
                    DescriptionLevel::Full => "2",
                },
            )
            .append_pair("ATTRIBUTES", flag(p.attributes))
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("the ID parameter is mandatory")]
    MissingId,
    #[error("bad value {value:?} for {param}: {detail}")]
    BadValue { param: String, value: String, detail: String },
    #[error("unknown parameter {0:?}")]
    UnknownParam(String),
    #[error("parameter {0} given more than once")]
    DuplicateParam(String),
    /// The ID names a prefix the store does not declare, so no record can
    /// match it.
    #[error("no namespace for prefix {0:?}")]
    UnknownPrefix(String),
}

impl QueryError {
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::MissingId => "MissingId",
            QueryError::BadValue { .. } => "BadValue",
            QueryError::UnknownParam(_) => "UnknownParam",
            QueryError::DuplicateParam(_) => "DuplicateParam",
            QueryError::UnknownPrefix(_) => "NotFound",
        }
    }
}

fn bad(param: &str, value: &str, detail: impl Into<String>) -> QueryError {
    QueryError::BadValue {
        param: param.to_owned(),
        value: value.to_owned(),
        detail: detail.into(),
    }
}

/// Parses a raw query string (without the leading `?`). Parameter names and
/// enumerated values are case-insensitive; an ID without a prefix gets the
/// default prefix of `namespaces`.
pub fn parse_provsap_query(query: &str, namespaces: &Namespaces) -> Result<ProvSapRequest, QueryError> {
    let mut seen = BTreeSet::new();
    let mut id = None;
    let mut req = ProvSapRequest::new(QualifiedId::new("ex", "_").expect("placeholder id is valid"));
    for (name, value) in form_urlencoded::parse(query.as_bytes()) {
        let upper = name.to_ascii_uppercase();
        let Some(param) = PARAMETERS.iter().find(|p| **p == upper) else {
            return Err(QueryError::UnknownParam(name.into_owned()));
        };
        if !seen.insert(*param) {
            return Err(QueryError::DuplicateParam((*param).to_owned()));
        }
        let v = value.as_ref();
        match *param {
            "ID" => {
                id = Some(match namespaces.parse_id(v) {
                    Ok(qid) => qid,
                    Err(ModelError::UnknownPrefix(p)) => return Err(QueryError::UnknownPrefix(p)),
                    Err(e) => return Err(bad("ID", v, e.to_string())),
                });
            }
            "DEPTH" => req.depth = v.parse().map_err(|e: String| bad("DEPTH", v, e))?,
            "DIRECTION" => req.direction = v.parse().map_err(|e: String| bad("DIRECTION", v, e))?,
            "RESPONSEFORMAT" => {
                let allowed = SerializationFormat::ALL
                    .into_iter()
                    .find(|f| f.as_str().eq_ignore_ascii_case(v));
                req.format = allowed.ok_or_else(|| {
                    bad("RESPONSEFORMAT", v, "expected PROV-JSON, PROV-N, PROV-DOT or PROV-SVG")
                })?;
            }
            "MODEL" => req.projection.model = v.parse().map_err(|e: String| bad("MODEL", v, e))?,
            "AGENTS" => req.projection.agents = parse_flag(v).map_err(|e| bad("AGENTS", v, e))?,
            "CONFIGURATION" => {
                req.projection.configuration = parse_flag(v).map_err(|e| bad("CONFIGURATION", v, e))?
            }
            "DESCRIPTIONS" => {
                req.projection.descriptions = v.parse().map_err(|e: String| bad("DESCRIPTIONS", v, e))?
            }
            "ATTRIBUTES" => req.projection.attributes = parse_flag(v).map_err(|e| bad("ATTRIBUTES", v, e))?,
            _ => unreachable!("parameter list is exhaustive"),
        }
    }
    req.id = id.ok_or(QueryError::MissingId)?;
    Ok(req)
}
