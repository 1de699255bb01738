//! ProvSAP: a stateless HTTP GET interface over the store.
//!
//! `GET /provsap?ID=...` returns the traversal closure of one record,
//! projected and serialized according to the remaining parameters.

mod query;
mod server;

use serde_json::json;

use crate::serialize::apply_projection;
use crate::store::{Store, StoreError};

pub use query::{parse_provsap_query, ProvSapRequest, QueryError, PARAMETERS};
pub use server::{serve, serve_with_threads, ServiceError, ServiceHandle, DEFAULT_THREADS};

pub const ENDPOINT: &str = "/provsap";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub content_type: String,
    pub body: Vec<u8>,
}

impl HttpResponse {
    pub fn error(status: u16, code: &str, detail: impl Into<String>) -> Self {
        let body = json!({ "error": code, "detail": detail.into() });
        let mut bytes = serde_json::to_vec(&body).expect("JSON value serializes");
        bytes.push(b'\n');
        HttpResponse {
            status,
            content_type: "application/json".to_owned(),
            body: bytes,
        }
    }

    pub fn body_text(&self) -> &str {
        std::str::from_utf8(&self.body).unwrap_or("")
    }
}

fn store_failure(e: StoreError) -> HttpResponse {
    match e {
        StoreError::NotFound(id) => HttpResponse::error(404, "NotFound", format!("no record with id {id}")),
        other => HttpResponse::error(500, "StoreError", other.to_string()),
    }
}

/// Serves a parsed request: traverse, project, render.
pub fn handle_provsap(store: &Store, req: &ProvSapRequest) -> HttpResponse {
    let closure = match store.traverse(&req.id, req.depth, req.direction) {
        Ok(doc) => doc,
        Err(e) => return store_failure(e),
    };
    let projected = apply_projection(&closure, &req.projection);
    match req.format.render(&projected) {
        Ok(text) => HttpResponse {
            status: 200,
            content_type: req.format.mime_type().to_owned(),
            body: text.into_bytes(),
        },
        Err(e) => HttpResponse::error(500, "SerializeError", e.to_string()),
    }
}

/// Serves a raw query string, resolving unprefixed IDs against the store's
/// default prefix.
pub fn handle_query(store: &Store, query: &str) -> HttpResponse {
    let snapshot = store.snapshot();
    match parse_provsap_query(query, &snapshot.document().namespaces) {
        Ok(req) => handle_provsap(store, &req),
        Err(e @ QueryError::UnknownPrefix(_)) => HttpResponse::error(404, e.code(), e.to_string()),
        Err(e) => HttpResponse::error(400, e.code(), e.to_string()),
    }
}

/// Routes one request by method and path (`path` may carry `?query`).
pub fn route(store: &Store, method: &str, url: &str) -> HttpResponse {
    let (path, query) = url.split_once('?').unwrap_or((url, ""));
    if path != ENDPOINT {
        return HttpResponse::error(404, "NoSuchEndpoint", format!("no endpoint at {path}"));
    }
    if !method.eq_ignore_ascii_case("GET") {
        return HttpResponse::error(400, "BadMethod", format!("{method} not supported, use GET"));
    }
    if store.is_read_only() {
        if let Err(e) = store.refresh() {
            return store_failure(e);
        }
    }
    handle_query(store, query)
}
