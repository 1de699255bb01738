// Start the ProvSAP service on a free port and query it over HTTP.
//
// ```bash
// cargo run --example provsap_service
// ```

use std::sync::Arc;

use provkit::model::{Activity, Entity, ProvenanceDocument, QualifiedId, Used, WasGeneratedBy};
use provkit::provsap::{handle_provsap, parse_provsap_query, serve};
use provkit::store::Store;

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

pub fn run_example() -> Result<()> {
    let id = |s: &str| QualifiedId::from_rendered(s);
    let mut doc = ProvenanceDocument::default();
    doc.add_entity(Entity::named(id("ex:a9b7e2")?, "event list"))?;
    doc.add_entity(Entity::named(id("ex:run42")?, "raw run"))?;
    doc.add_activity(Activity::named(id("ex:dl3")?, "dl3 export"))?;
    doc.add_used(Used::new(id("ex:dl3")?, id("ex:run42")?))?;
    doc.add_generation(WasGeneratedBy::new(id("ex:a9b7e2")?, id("ex:dl3")?))?;

    let dir = tempfile::tempdir()?;
    let store = Arc::new(Store::open(dir.path())?);
    store.ingest_document(&doc)?;
    let service = serve(Arc::clone(&store), "127.0.0.1", 0)?;
    let base = service.endpoint_url();

    let query = "ID=a9b7e2&DEPTH=1&RESPONSEFORMAT=PROV-N";
    let reply = ureq::get(&format!("{base}?{query}")).call()?;
    println!("{} {}", reply.status(), reply.content_type());
    let body = reply.into_string()?;
    print!("{body}");

    let direct = handle_provsap(&store, &parse_provsap_query(query, &doc.namespaces)?);
    assert_eq!(body.as_bytes(), direct.body.as_slice());

    match ureq::get(&format!("{base}?DEPTH=1")).call() {
        Err(ureq::Error::Status(code, r)) => println!("{code} {}", r.into_string()?.trim_end()),
        other => return Err(format!("expected an error status, got {other:?}").into()),
    }

    service.shutdown();
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
