//! Provenance management for data-processing pipelines.
//!
//! * [`model`]: the typed provenance graph, validation and merging.
//! * [`capture`]: JSON-lines capture events, a recorder for instrumenting
//!   pipelines, and the folder that turns an event stream into a document.
//! * [`store`]: a durable on-disk store with depth/direction traversal.
//! * [`serialize`]: projections and PROV-JSON, PROV-N, DOT and SVG output.
//! * [`laststep`]: last-step provenance records as FITS header cards, and
//!   reconstruction of full provenance from collected headers.
//! * [`provsap`]: the ProvSAP HTTP access protocol.
//! * [`cli`]: the `provkit` command line.

pub mod capture;
pub mod cli;
pub mod laststep;
pub mod model;
pub mod provsap;
pub mod serialize;
pub mod store;

pub use model::{ProvenanceDocument, QualifiedId};
