// Ingest a small chain into an on-disk store and walk it backward and
// forward at several depths.
//
// ```bash
// cargo run --example store_traversal
// ```

use provkit::model::{Activity, Entity, ProvenanceDocument, QualifiedId, Used, WasGeneratedBy};
use provkit::store::{Depth, Direction, Store};

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

fn chain() -> Result<ProvenanceDocument> {
    let id = |s: &str| QualifiedId::from_rendered(s);
    let mut doc = ProvenanceDocument::default();
    for e in ["raw", "lvl1", "lvl2"] {
        doc.add_entity(Entity::named(id(&format!("ex:{e}"))?, e))?;
    }
    for (act, input, output) in [("calib", "raw", "lvl1"), ("reduce", "lvl1", "lvl2")] {
        let a = id(&format!("ex:{act}"))?;
        doc.add_activity(Activity::named(a.clone(), act))?;
        doc.add_used(Used::new(a.clone(), id(&format!("ex:{input}"))?))?;
        doc.add_generation(WasGeneratedBy::new(id(&format!("ex:{output}"))?, a))?;
    }
    Ok(doc)
}

pub fn run_example() -> Result<()> {
    let dir = tempfile::tempdir()?;
    let lvl2 = QualifiedId::from_rendered("ex:lvl2")?;
    let raw = QualifiedId::from_rendered("ex:raw")?;

    {
        let store = Store::open(dir.path())?;
        let stats = store.ingest_document(&chain()?)?;
        println!("first ingest: {stats:?}");
        let again = store.ingest_document(&chain()?)?;
        assert_eq!(again.inserted + again.updated, 0);
    }

    // A second process would open read-only while a writer holds the lock.
    let store = Store::open_read_only(dir.path())?;
    for depth in [Depth::Hops(0), Depth::Hops(1), Depth::Hops(2), Depth::All] {
        let back = store.traverse(&lvl2, depth, Direction::Backward)?;
        let ids: Vec<String> = back.record_ids().iter().map(|i| i.to_string()).collect();
        println!("BACKWARD {depth:>3} from ex:lvl2: {}", ids.join(" "));
    }
    let forward = store.traverse(&raw, Depth::All, Direction::Forward)?;
    assert!(forward.entities.contains_key(&lvl2));

    let missing = QualifiedId::from_rendered("ex:nothing")?;
    assert!(store.traverse(&missing, Depth::All, Direction::Backward).is_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
