// Embed last-step provenance in FITS headers, then rebuild the full graph
// from the collected headers alone.
//
// ```bash
// cargo run --example laststep_headers
// ```

use provkit::laststep::fits::{minimal_fits, read_primary_header};
use provkit::laststep::{build_laststep, emit_header_cards, parse_header_cards, reconstruct};
use provkit::model::{
    Activity, Agent, AgentKind, Entity, ProvenanceDocument, QualifiedId, Used, WasAttributedTo, WasGeneratedBy,
};
use provkit::store::Store;

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

pub fn run_example() -> Result<()> {
    let id = |s: &str| QualifiedId::from_rendered(s);
    let mut doc = ProvenanceDocument::default();
    doc.add_agent(Agent::new(id("ex:kim")?, "Kim Contact", AgentKind::Person))?;
    for e in ["raw", "lvl1", "lvl2"] {
        doc.add_entity(Entity::named(id(&format!("ex:{e}"))?, e))?;
    }
    for (act, input, output) in [("calib", "raw", "lvl1"), ("reduce", "lvl1", "lvl2")] {
        let a = id(&format!("ex:{act}"))?;
        doc.add_activity(Activity::named(a.clone(), act))?;
        doc.add_used(Used::new(a.clone(), id(&format!("ex:{input}"))?))?;
        doc.add_generation(WasGeneratedBy::new(id(&format!("ex:{output}"))?, a))?;
    }
    let mut contact = WasAttributedTo::new(id("ex:lvl2")?, id("ex:kim")?);
    contact.role = Some("contact".into());
    doc.add_attribution(contact)?;

    let dir = tempfile::tempdir()?;
    let store = Store::open(dir.path())?;
    store.ingest_document(&doc)?;

    let mut files = Vec::new();
    for e in ["lvl1", "lvl2"] {
        let record = build_laststep(&store, &id(&format!("ex:{e}"))?)?;
        let cards = emit_header_cards(&record)?;
        if e == "lvl2" {
            for card in &cards {
                println!("|{card}|");
            }
        }
        files.push(minimal_fits(&cards));
    }

    let records = files
        .iter()
        .map(|bytes| parse_header_cards(&read_primary_header(bytes)?))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let rebuilt = reconstruct(&records, &doc.namespaces)?;
    println!("rebuilt {} records, stubs: {:?}", rebuilt.record_count(), rebuilt.incomplete_ids);
    assert_eq!(rebuilt.used.len(), 2);
    assert_eq!(rebuilt.generations.len(), 2);
    assert!(rebuilt.is_stub(&id("ex:raw")?));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
