// Instrument a two-stage pipeline with the recorder, then fold the event
// log into a provenance document.
//
// ```bash
// cargo run --example capture_pipeline
// ```

use provkit::capture::{fold_events, parse_event_log, RecorderSession};
use provkit::model::{validate_document, Agent, AgentKind, Entity, Namespaces, QualifiedId, ValueType};
use provkit::serialize::to_prov_n;

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

pub fn run_example() -> Result<()> {
    let ns = Namespaces::default();
    let id = |s: &str| QualifiedId::from_rendered(s);
    let mut rec = RecorderSession::new(Vec::new(), ns.clone()).with_token("demo");

    let operator = Agent::new(id("ex:ana")?, "Ana Operator", AgentKind::Person);
    rec.declare_agent(&operator)?;
    for name in ["raw", "flat", "calibrated", "catalog"] {
        rec.declare_entity(&Entity::named(id(&format!("ex:{name}"))?, name))?;
    }

    let calibrate = rec.begin_activity("calibrate", None)?;
    rec.record_used(&calibrate, &id("ex:raw")?, Some("science"))?;
    rec.record_used(&calibrate, &id("ex:flat")?, Some("flat"))?;
    rec.set_parameter(&calibrate, "gain", "1.25", ValueType::Real)?;
    rec.associate(&calibrate, &operator.id, Some("operator"))?;
    rec.record_generated(&calibrate, &id("ex:calibrated")?, None)?;
    rec.end_activity(&calibrate)?;

    let extract = rec.begin_activity("extract sources", None)?;
    rec.record_used(&extract, &id("ex:calibrated")?, None)?;
    rec.set_parameter(&extract, "threshold", "5", ValueType::Integer)?;
    rec.record_generated(&extract, &id("ex:catalog")?, None)?;
    rec.end_activity(&extract)?;
    rec.attribute(&id("ex:catalog")?, &operator.id, Some("contact"))?;

    let log = String::from_utf8(rec.into_sink())?;
    println!("{} capture events", log.lines().count());

    let events = parse_event_log(&log, &ns)?;
    let (doc, warnings) = fold_events(&events, &ns);
    assert!(warnings.is_empty(), "{warnings:?}");
    let report = validate_document(&doc);
    assert!(report.is_clean(), "{:?}", report.findings);
    assert_eq!(doc.activities.len(), 2);
    assert_eq!(doc.parameters.len(), 2);

    print!("{}", to_prov_n(&doc));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
