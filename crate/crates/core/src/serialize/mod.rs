//! Projections and serializations of provenance documents.
//!
//! Every writer is a pure, byte-deterministic function of the document.

mod dot;
mod projection;
mod provjson;
mod provn;
mod svg;

use std::fmt;
use std::str::FromStr;

use crate::model::ProvenanceDocument;

pub use dot::{to_dot, to_dot_derivations};
pub use projection::{apply_projection, parse_flag, DescriptionLevel, ModelFlavor, ProjectionOptions};
pub use provjson::{from_prov_json, to_prov_json};
pub use provn::to_prov_n;
pub use svg::to_svg;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SerializeError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("unknown section {0:?}")]
    UnknownSection(String),
    #[error("bad record {id}: {detail}")]
    BadRecord { id: String, detail: String },
    #[error("graph contains a cycle through {0}")]
    CyclicGraph(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SerializationFormat {
    ProvJson,
    ProvN,
    ProvDot,
    ProvSvg,
}

impl SerializationFormat {
    pub const ALL: [SerializationFormat; 4] = [
        SerializationFormat::ProvJson,
        SerializationFormat::ProvN,
        SerializationFormat::ProvDot,
        SerializationFormat::ProvSvg,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SerializationFormat::ProvJson => "PROV-JSON",
            SerializationFormat::ProvN => "PROV-N",
            SerializationFormat::ProvDot => "PROV-DOT",
            SerializationFormat::ProvSvg => "PROV-SVG",
        }
    }

    pub fn mime_type(&self) -> &'static str {
        match self {
            SerializationFormat::ProvJson => "application/json",
            SerializationFormat::ProvN => "text/provenance-notation",
            SerializationFormat::ProvDot => "text/vnd.graphviz",
            SerializationFormat::ProvSvg => "image/svg+xml",
        }
    }

    pub fn file_extension(&self) -> &'static str {
        match self {
            SerializationFormat::ProvJson => "json",
            SerializationFormat::ProvN => "provn",
            SerializationFormat::ProvDot => "dot",
            SerializationFormat::ProvSvg => "svg",
        }
    }

    pub fn render(&self, doc: &ProvenanceDocument) -> Result<String, SerializeError> {
        match self {
            SerializationFormat::ProvJson => Ok(to_prov_json(doc)),
            SerializationFormat::ProvN => Ok(to_prov_n(doc)),
            SerializationFormat::ProvDot => Ok(to_dot(doc)),
            SerializationFormat::ProvSvg => to_svg(doc),
        }
    }
}

impl fmt::Display for SerializationFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SerializationFormat {
    type Err = String;

    /// Case-insensitive; the `PROV-` prefix is optional.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.to_ascii_uppercase();
        let bare = upper.strip_prefix("PROV-").unwrap_or(&upper);
        match bare {
            "JSON" => Ok(SerializationFormat::ProvJson),
            "N" | "PROVN" => Ok(SerializationFormat::ProvN),
            "DOT" => Ok(SerializationFormat::ProvDot),
            "SVG" => Ok(SerializationFormat::ProvSvg),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

/// Double-quoted string with `\` and `"` escaped, shared by PROV-N and DOT.
pub(crate) fn quoted(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}
