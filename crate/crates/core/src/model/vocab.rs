//! Attribute keys used when records are flattened into key/value form
//! (PROV-JSON, PROV-N, the W3C model mapping). User attributes may not reuse
//! these keys.

pub const LABEL: &str = "prov:label";
pub const LOCATION: &str = "prov:location";
pub const START_TIME: &str = "prov:startTime";
pub const END_TIME: &str = "prov:endTime";
pub const TYPE: &str = "prov:type";
pub const ROLE: &str = "prov:role";
pub const TIME: &str = "prov:time";
pub const ACTIVITY: &str = "prov:activity";
pub const ENTITY: &str = "prov:entity";
pub const AGENT: &str = "prov:agent";

pub const GENERATED_AT: &str = "voprov:generatedAtTime";
pub const COMMENT: &str = "voprov:comment";
pub const DESCRIPTION: &str = "voprov:description";
pub const EMAIL: &str = "voprov:email";
pub const STUB: &str = "voprov:stub";
pub const VERSION: &str = "voprov:version";
pub const DOC: &str = "voprov:doc";
pub const DOCURL: &str = "voprov:docurl";
pub const CODE_REF: &str = "voprov:code_ref";
pub const CODE_REVISION: &str = "voprov:code_revision";
pub const NAME: &str = "voprov:name";
pub const VALUE: &str = "voprov:value";
pub const VALUE_TYPE: &str = "voprov:valueType";

/// Prefix of the per-parameter activity attributes of the W3C mapping.
pub const PARAMETER_PREFIX: &str = "voprov:parameter_";
pub const DESC_NAME: &str = "voprov:desc_name";
pub const DESC_VERSION: &str = "voprov:desc_version";
pub const DESC_DOCURL: &str = "voprov:desc_docurl";

pub const ENTITY_RESERVED: &[&str] = &[LABEL, LOCATION, GENERATED_AT, COMMENT, STUB];
pub const ACTIVITY_RESERVED: &[&str] = &[LABEL, START_TIME, END_TIME, DESCRIPTION, COMMENT, STUB];
pub const AGENT_RESERVED: &[&str] = &[LABEL, TYPE, EMAIL, STUB];
