//! Last-step provenance: the flat keyword record describing one entity and
//! the step that produced it, its FITS header card form, and reconstruction
//! of a provenance graph from a collection of such records.

mod build;
pub mod cards;
pub mod fits;
mod record;

use crate::model::{ModelError, QualifiedId};
use crate::store::StoreError;

pub use build::{
    build_laststep, build_laststep_with, expand_record, laststep_from_document, reconstruct, LastStepOptions,
    CONTACT_ROLE,
};
pub use record::{emit_header_cards, parse_header_cards, LastStepRecord};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LastStepError {
    #[error("no entity with id {0}")]
    NotFound(QualifiedId),
    #[error("card {index}: {detail}")]
    MalformedCard { index: usize, detail: String },
    #[error("keyword {0} appears twice")]
    DuplicateKeyword(String),
    #[error("header carries no provenance keywords")]
    NoProvenance,
    #[error("{count} entries in {family}n exceed the 999-card limit")]
    TooManyIndexed { family: String, count: usize },
    #[error("invalid last-step record: {0}")]
    InvalidRecord(String),
    #[error("conflicting record {0}")]
    ConflictingRecord(String),
    #[error("not a FITS file: {0}")]
    NotFits(String),
    #[error("{0}")]
    Model(ModelError),
    #[error("{0}")]
    Store(StoreError),
}

impl From<ModelError> for LastStepError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::ConflictingRecord(id) => LastStepError::ConflictingRecord(id),
            other => LastStepError::Model(other),
        }
    }
}

impl From<StoreError> for LastStepError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(id) => LastStepError::NotFound(id),
            other => LastStepError::Store(other),
        }
    }
}
