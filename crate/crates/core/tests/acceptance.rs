// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Built with `harness = false`.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{
    expected_pipeline, id, linear_chain, oracle_closure, random_document, random_start, record_pipeline, shape,
    GenConfig, OPERATOR, RAW,
};
use provkit::capture::{fold_events, parse_event_log};
use provkit::laststep::fits::{minimal_fits, read_primary_header};
use provkit::laststep::{build_laststep, emit_header_cards, parse_header_cards, reconstruct, LastStepRecord};
use provkit::model::{validate_document, vocab, Namespaces, ProvenanceDocument};
use provkit::provsap::route;
use provkit::serialize::*;
use provkit::store::{traverse_with_index, Depth, Direction, Store, StoreIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(limit: Duration, started: Instant) -> Result<(), String> {
    let took = started.elapsed();
    if took < limit {
        Ok(())
    } else {
        Err(format!("took {:.2}s, limit {}s", took.as_secs_f64(), limit.as_secs()))
    }
}

fn golden_science() -> Vec<u8> {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", "provsap_science.json"].iter().collect();
    std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn pipeline_store() -> (tempfile::TempDir, Store) {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    store.ingest_document(&expected_pipeline()).unwrap();
    (dir, store)
}

fn capture_round_trip() -> Check {
    let started = Instant::now();
    let ns = Namespaces::default();
    let events = parse_event_log(&record_pipeline(), &ns).map_err(|e| e.to_string())?;
    let (doc, warnings) = fold_events(&events, &ns);
    ensure!(warnings.is_empty(), "fold warnings: {warnings:?}");
    let report = validate_document(&doc);
    ensure!(report.findings.is_empty(), "validation findings: {:?}", report.findings);
    ensure!(doc == expected_pipeline(), "folded document differs from direct construction");
    ensure!(
        doc.entities.len() >= 6 && doc.activities.len() >= 3 && doc.agents.len() == 2 && doc.parameters.len() == 4,
        "pipeline too small"
    );
    within(Duration::from_secs(1), started)?;
    Ok(format!("{} records", doc.record_count()))
}

fn traversal_oracle() -> Check {
    let started = Instant::now();
    let mut pairs = 0;
    for seed in 0..100u64 {
        let doc = random_document(seed, GenConfig::large());
        ensure!(doc.record_count() <= 1000, "seed {seed}: {} records", doc.record_count());
        let index = StoreIndex::build(&doc);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let (start, dir) = random_start(&mut rng, &doc);
            let got = traverse_with_index(&doc, &index, &start, Depth::All, dir).map_err(|e| e.to_string())?;
            ensure!(got == oracle_closure(&doc, &start, Depth::All, dir), "seed {seed}: {start} {dir} differs");
            let mut previous = BTreeSet::new();
            for n in 0..=3 {
                let ids = traverse_with_index(&doc, &index, &start, Depth::Hops(n), dir).map_err(|e| e.to_string())?.record_ids();
                ensure!(previous.is_subset(&ids), "seed {seed}: {start} {dir} not monotone at depth {n}");
                previous = ids;
            }
            ensure!(previous.is_subset(&got.record_ids()), "seed {seed}: depth 3 exceeds ALL");
            pairs += 1;
        }
    }
    within(Duration::from_secs(30), started)?;
    Ok(format!("{pairs} start/direction pairs"))
}

fn serialization_round_trip() -> Check {
    let started = Instant::now();
    for seed in 0..200u64 {
        let doc = random_document(seed, GenConfig::small());
        let text = to_prov_json(&doc);
        let back = from_prov_json(&text, &Namespaces::default()).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(back == doc, "seed {seed}: round trip changed the document");
        for format in SerializationFormat::ALL {
            let first = format.render(&doc).map_err(|e| e.to_string())?;
            let second = format.render(&doc).map_err(|e| e.to_string())?;
            ensure!(first == second, "seed {seed}: {format} is not deterministic");
        }
    }
    within(Duration::from_secs(30), started)?;
    Ok("200 documents, 4 formats".into())
}

fn projection_soundness() -> Check {
    let mut checked = 0;
    for seed in 0..50u64 {
        let doc = random_document(seed, GenConfig::small());
        for model in [ModelFlavor::Ivoa, ModelFlavor::W3c] {
            for bits in 0..8u8 {
                for descriptions in [DescriptionLevel::None, DescriptionLevel::Reference, DescriptionLevel::Full] {
                    let opts = ProjectionOptions {
                        model,
                        agents: bits & 1 != 0,
                        configuration: bits & 2 != 0,
                        attributes: bits & 4 != 0,
                        descriptions,
                    };
                    let out = apply_projection(&doc, &opts);
                    let json: serde_json::Value = serde_json::from_str(&to_prov_json(&out)).unwrap();
                    let section = |name: &str| json.get(name).and_then(|v| v.as_object()).map_or(0, |o| o.len());
                    let ctx = format!("seed {seed} {opts:?}");
                    if !opts.agents {
                        ensure!(out.agents.len() + out.associations.len() + out.attributions.len() == 0, "agents kept, {ctx}");
                        ensure!(section("agent") + section("wasAssociatedWith") + section("wasAttributedTo") == 0, "agents serialized, {ctx}");
                    } else {
                        ensure!(out.agents.len() == doc.agents.len(), "agents lost, {ctx}");
                    }
                    if !opts.configuration {
                        ensure!(out.parameters.is_empty() && section("parameter") == 0, "parameters kept, {ctx}");
                        let leaked = out
                            .activities
                            .values()
                            .flat_map(|a| a.attributes.keys())
                            .any(|k| k.starts_with(vocab::PARAMETER_PREFIX));
                        ensure!(!leaked, "parameters leaked into attributes, {ctx}");
                    } else if model == ModelFlavor::Ivoa {
                        ensure!(out.parameters.len() == doc.parameters.len(), "parameters lost, {ctx}");
                    }
                    match descriptions {
                        DescriptionLevel::None => {
                            ensure!(out.descriptions.is_empty() && section("activityDescription") == 0, "descriptions kept, {ctx}");
                            ensure!(out.activities.values().all(|a| a.description_ref.is_none()), "description refs kept, {ctx}");
                        }
                        DescriptionLevel::Reference => {
                            ensure!(out.descriptions.is_empty() && section("activityDescription") == 0, "descriptions kept, {ctx}");
                        }
                        DescriptionLevel::Full if model == ModelFlavor::Ivoa => {
                            ensure!(out.descriptions.len() == doc.descriptions.len(), "descriptions lost, {ctx}");
                        }
                        DescriptionLevel::Full => {
                            ensure!(out.descriptions.is_empty(), "W3C output has descriptions, {ctx}");
                        }
                    }
                    if !opts.attributes {
                        let n: usize = out.entities.values().map(|e| e.attributes.len()).sum::<usize>()
                            + out.activities.values().map(|a| a.attributes.len()).sum::<usize>()
                            + out.agents.values().map(|g| g.attributes.len()).sum::<usize>();
                        ensure!(n == 0, "{n} attributes kept, {ctx}");
                    }
                    ensure!(
                        out.entities.len() == doc.entities.len() && out.activities.len() == doc.activities.len(),
                        "core records lost, {ctx}"
                    );
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} document/option pairs"))
}

fn headers(store: &Store, skip: Option<&str>) -> Result<Vec<LastStepRecord>, String> {
    let doc = expected_pipeline();
    let generated: BTreeSet<_> = doc.generations.values().map(|g| g.entity.clone()).collect();
    generated
        .iter()
        .filter(|e| Some(e.local()) != skip)
        .map(|e| {
            let record = build_laststep(store, e).map_err(|x| x.to_string())?;
            let cards = emit_header_cards(&record).map_err(|x| x.to_string())?;
            let parsed = read_primary_header(&minimal_fits(&cards)).map_err(|x| x.to_string())?;
            parse_header_cards(&parsed).map_err(|x| x.to_string())
        })
        .collect()
}

fn laststep_reconstruction() -> Check {
    let (_dir, store) = pipeline_store();
    let captured = expected_pipeline();
    let rebuilt = reconstruct(&headers(&store, None)?, &captured.namespaces).map_err(|e| e.to_string())?;
    ensure!(shape(&rebuilt) == shape(&captured), "full header set: {:?} != {:?}", shape(&rebuilt), shape(&captured));
    let raws: BTreeSet<_> = RAW.iter().map(|r| id(&format!("ex:{r}"))).collect();
    ensure!(rebuilt.incomplete_ids == raws, "unexpected stubs {:?}", rebuilt.incomplete_ids);

    let partial = reconstruct(&headers(&store, Some("reduced"))?, &captured.namespaces).map_err(|e| e.to_string())?;
    let reduced = id("ex:reduced");
    ensure!(partial.is_stub(&reduced), "withheld entity is not a stub");
    let mut want = shape(&captured);
    want.contacts.remove(&(reduced, id(OPERATOR)));
    ensure!(shape(&partial) == want, "withheld header lost other records");
    Ok(format!("{} headers", captured.generations.len()))
}

fn provsap_golden(store: &Store) -> Check {
    let r = route(store, "GET", "/provsap?ID=science");
    ensure!(r.status == 200 && r.content_type == "application/json", "status {} {}", r.status, r.content_type);
    ensure!(r.body == golden_science(), "body differs from golden file");
    Ok(String::new())
}

fn provsap_protocol() -> Check {
    let (_dir, store) = pipeline_store();
    provsap_golden(&store)?;

    for e in common::pipeline_entities().iter().skip(RAW.len()) {
        let r = route(&store, "GET", &format!("/provsap?ID={e}&DEPTH=1"));
        ensure!(r.status == 200, "{e}: status {}", r.status);
        let doc = from_prov_json(r.body_text(), &Namespaces::default()).map_err(|x| x.to_string())?;
        let ls = build_laststep(&store, &id(&format!("ex:{e}"))).map_err(|x| x.to_string())?;
        let mut entities: BTreeSet<_> = ls.used_ids.iter().chain(&ls.sibling_generated_ids).cloned().collect();
        entities.insert(ls.entity_id.clone());
        ensure!(doc.entities.keys().cloned().collect::<BTreeSet<_>>() == entities, "{e}: entity set differs");
        ensure!(
            doc.activities.keys().collect::<Vec<_>>() == ls.activity_id.iter().collect::<Vec<_>>(),
            "{e}: activity differs"
        );
        let from_response = provkit::laststep::laststep_from_document(&doc, &ls.entity_id, Default::default())
            .map_err(|x| x.to_string())?;
        ensure!(from_response == ls, "{e}: last-step content differs");
    }

    for (url, status) in [
        ("/provsap", 400),
        ("/provsap?DEPTH=1", 400),
        ("/provsap?ID=nothing_here", 404),
        ("/provsap?ID=science&RESPONSEFORMAT=PROV-XML", 400),
        ("/provsap?ID=science&DIRECTION=SIDEWAYS", 400),
        ("/provsap?ID=science&MODEL=CDM", 400),
    ] {
        let r = route(&store, "GET", url);
        ensure!(r.status == status, "{url}: status {} expected {status}", r.status);
    }

    for format in SerializationFormat::ALL {
        let r = route(&store, "GET", &format!("/provsap?ID=science&RESPONSEFORMAT={format}"));
        ensure!(r.status == 200 && r.content_type == format.mime_type(), "{format}: {} {}", r.status, r.content_type);
    }
    Ok("golden, last step, errors, MIME types".into())
}

fn durability() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let doc = expected_pipeline();
    {
        let store = Store::open(dir.path()).map_err(|e| e.to_string())?;
        store.ingest_document(&doc).map_err(|e| e.to_string())?;
    }
    let store = Store::open_read_only(dir.path()).map_err(|e| e.to_string())?;
    ensure!(store.snapshot().document() == &doc, "reopened contents differ");
    let mut checks = 0;
    for e in common::pipeline_entities() {
        for d in [Direction::Backward, Direction::Forward] {
            let start = id(&format!("ex:{e}"));
            let got = store.traverse(&start, Depth::All, d).map_err(|x| x.to_string())?;
            ensure!(got == oracle_closure(&doc, &start, Depth::All, d), "{start} {d} differs after reopen");
            checks += 1;
        }
    }
    provsap_golden(&store)?;
    Ok(format!("{checks} spot checks and golden"))
}

fn large_chain() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).map_err(|e| e.to_string())?;
    let doc: ProvenanceDocument = linear_chain(10_000);
    store.ingest_document(&doc).map_err(|e| e.to_string())?;
    let last = id("ex:e10000");

    let started = Instant::now();
    let closure = store.traverse(&last, Depth::All, Direction::Backward).map_err(|e| e.to_string())?;
    let traverse_time = started.elapsed();
    ensure!(
        closure.entities.len() == 10_001 && closure.activities.len() == 10_000,
        "closure has {} entities and {} activities",
        closure.entities.len(),
        closure.activities.len()
    );
    within(Duration::from_secs(2), started)?;

    let started = Instant::now();
    let r = route(&store, "GET", "/provsap?ID=e10000&RESPONSEFORMAT=PROV-JSON");
    ensure!(r.status == 200, "status {}", r.status);
    let response_time = started.elapsed();
    within(Duration::from_secs(5), started)?;
    Ok(format!(
        "traverse {:.2}s, PROV-JSON {:.2}s for {} bytes",
        traverse_time.as_secs_f64(),
        response_time.as_secs_f64(),
        r.body.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("capture round-trip", capture_round_trip),
        ("traversal oracle equivalence", traversal_oracle),
        ("serialization round-trip", serialization_round_trip),
        ("projection soundness", projection_soundness),
        ("last-step reconstruction", laststep_reconstruction),
        ("ProvSAP protocol", provsap_protocol),
        ("durability", durability),
        ("10,000-activity chain", large_chain),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}) {secs:.2}s", n + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why} {secs:.2}s", n + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
