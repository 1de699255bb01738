//! Capture "inside" a running pipeline.
//!
//! Instrumented code reports what happens through a [`RecorderSession`],
//! which appends one JSON object per line to a `.provlog.jsonl` sink. The
//! same lines are parsed back with [`parse_event_line`] and turned into a
//! [`ProvenanceDocument`](crate::model::ProvenanceDocument) by
//! [`fold_events`].

mod event;
mod fold;
mod recorder;

pub use event::{parse_event_line, CaptureEvent, EventKind, EventPayload};
pub use fold::{fold_events, FoldWarning};
pub use recorder::{ActivityHandle, RecorderSession};

use crate::model::{Namespaces, ProvenanceDocument, QualifiedId};

/// File extension of capture logs.
pub const EVENT_FILE_EXTENSION: &str = "provlog.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CaptureError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("unknown event kind {0:?}")]
    UnknownEventKind(String),
    #[error("{kind} event is missing field {field:?}")]
    MissingField { kind: String, field: String },
    #[error("{kind} event has invalid {field}: {detail}")]
    InvalidField {
        kind: String,
        field: String,
        detail: String,
    },
    #[error("activity {0} was already ended")]
    UseAfterEnd(QualifiedId),
    #[error("activity {0} was not started by this session")]
    UnknownHandle(QualifiedId),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<CaptureError>,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CaptureError {
    fn from(e: std::io::Error) -> Self {
        CaptureError::Io(e.to_string())
    }
}

/// Parses a whole JSON-lines text. Blank lines are skipped; the first bad
/// line aborts with its 1-based line number.
pub fn parse_event_log(text: &str, namespaces: &Namespaces) -> Result<Vec<CaptureEvent>, CaptureError> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            parse_event_line(line, namespaces).map_err(|e| CaptureError::AtLine {
                line: i + 1,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Reads, parses and folds a capture log file.
pub fn fold_event_file(
    path: &std::path::Path,
    namespaces: &Namespaces,
) -> Result<(ProvenanceDocument, Vec<FoldWarning>), CaptureError> {
    let text = std::fs::read_to_string(path)?;
    let events = parse_event_log(&text, namespaces)?;
    Ok(fold_events(&events, namespaces))
}
