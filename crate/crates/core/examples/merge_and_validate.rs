// Merge partial documents, upgrade stubs, and inspect validation findings.
//
// ```bash
// cargo run --example merge_and_validate
// ```

use provkit::model::{
    merge_documents, validate_document, Activity, Entity, ModelError, ProvenanceDocument, QualifiedId, Used,
    WasGeneratedBy,
};

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

pub fn run_example() -> Result<()> {
    let id = |s: &str| QualifiedId::from_rendered(s);

    // Downstream view: knows the product and its step, only the id of the input.
    let mut late = ProvenanceDocument::default();
    late.add_entity(Entity::named(id("ex:image")?, "image"))?;
    late.add_activity(Activity::named(id("ex:reduce")?, "reduce"))?;
    late.add_generation(WasGeneratedBy::new(id("ex:image")?, id("ex:reduce")?))?;
    late.add_used(Used::new(id("ex:reduce")?, id("ex:raw")?))?;
    late.ensure_entity_stub(&id("ex:raw")?);
    println!("late: stubs {:?}", late.incomplete_ids);

    // Upstream view describes the input fully.
    let mut early = ProvenanceDocument::default();
    let mut raw = Entity::named(id("ex:raw")?, "raw exposure");
    raw.location = Some("file:///data/raw.fits".into());
    early.add_entity(raw)?;

    let merged = merge_documents(&late, &early)?;
    assert!(merged.incomplete_ids.is_empty());
    assert_eq!(merged, merge_documents(&early, &late)?);
    println!("merged: {} records, clean: {}", merged.record_count(), validate_document(&merged).is_clean());

    let mut clash = ProvenanceDocument::default();
    clash.add_entity(Entity::named(id("ex:raw")?, "something else"))?;
    match merge_documents(&merged, &clash) {
        Err(ModelError::ConflictingRecord(what)) => println!("conflict: {what}"),
        other => return Err(format!("expected a conflict, got {other:?}").into()),
    }

    // A dangling reference without a stub shows up as a finding.
    let mut broken = ProvenanceDocument::default();
    broken.add_activity(Activity::named(id("ex:orphan_step")?, "orphan"))?;
    broken.used.extend(late.used.clone());
    for finding in validate_document(&broken).findings {
        println!("{finding}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
