//! The provenance graph data model: W3C PROV core records (entity, activity,
//! agent and the four relations), activity descriptions and configuration
//! parameters, plus document validation and merging.

mod document;
mod id;
mod merge;
mod records;
mod validate;
pub mod vocab;

pub use document::{MergeRecord, ProvenanceDocument};
pub use id::{
    parse_qualified_id, Namespaces, QualifiedId, DEFAULT_PREFIX, DEFAULT_URI, PROV_PREFIX, PROV_URI,
    VOPROV_PREFIX, VOPROV_URI,
};
pub use merge::{derive_progenitor_pairs, merge_documents, merge_into};
pub use records::*;
pub use validate::{validate_document, Finding, FindingCode, Severity, ValidationReport};

#[allow(unused_imports)]
pub(crate) use validate::{cyclic_components, CyclicComponent};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("empty identifier")]
    EmptyId,
    #[error("malformed identifier {0:?}")]
    MalformedId(String),
    #[error("unknown namespace prefix {0:?}")]
    UnknownPrefix(String),
    #[error("invalid timestamp {0}")]
    BadTimestamp(String),
    #[error("invalid {field} value {value:?}")]
    BadValue { field: &'static str, value: String },
    #[error("conflicting record {0}")]
    ConflictingRecord(String),
    #[error("prefix {0:?} bound to two different URIs")]
    ConflictingNamespace(String),
}
