mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{expected_pipeline, id, random_document, shape, GenConfig, OPERATOR};
use proptest::prelude::*;
use provkit::laststep::cards::{valid_keyword, CARD_LEN};
use provkit::laststep::fits::{minimal_fits, read_card_text, read_primary_header};
use provkit::laststep::*;
use provkit::model::{ProvenanceDocument, QualifiedId, Timestamp};
use provkit::store::Store;

/// Last-step fields read straight off the full document.
fn oracle(doc: &ProvenanceDocument, e: &QualifiedId) -> LastStepRecord {
    let entity = &doc.entities[e];
    let mut r = LastStepRecord::new(e.clone());
    r.entity_name = entity.name.clone();
    r.generated_at = entity.generated_at;
    r.location = entity.location.clone();
    let attributions: Vec<_> = doc.attributions.values().filter(|a| &a.entity == e).collect();
    let contacts: BTreeSet<_> = attributions
        .iter()
        .filter(|a| a.role.as_deref() == Some("contact"))
        .map(|a| a.agent.clone())
        .collect();
    let anyone: BTreeSet<_> = attributions.iter().map(|a| a.agent.clone()).collect();
    if let Some(agent) = contacts.first().or(anyone.first()) {
        r.contact_id = Some(agent.clone());
        let rec = &doc.agents[agent];
        r.contact_name = Some(rec.name.clone()).filter(|n| !n.is_empty());
        r.contact_email = rec.email.clone();
    }
    let generator = doc.generations.values().find(|g| &g.entity == e).map(|g| g.activity.clone());
    if let Some(a) = generator {
        let act = &doc.activities[&a];
        r.activity_name = act.name.clone();
        r.activity_start = act.start_time;
        r.activity_end = act.end_time;
        if let Some(d) = act.description_ref.as_ref().and_then(|d| doc.descriptions.get(d)) {
            r.description_name = Some(d.name.clone());
            r.description_version = d.version.clone();
        }
        let used: BTreeSet<_> = doc.used.values().filter(|u| u.activity == a).map(|u| u.entity.clone()).collect();
        r.used_ids = used.into_iter().collect();
        let siblings: BTreeSet<_> = doc
            .generations
            .values()
            .filter(|g| g.activity == a && &g.entity != e)
            .map(|g| g.entity.clone())
            .collect();
        r.sibling_generated_ids = siblings.into_iter().collect();
        let params: BTreeMap<_, _> = doc
            .parameters
            .values()
            .filter(|p| p.activity == a)
            .map(|p| (p.name.clone(), p.value.clone()))
            .collect();
        r.parameters = params.into_iter().collect();
        r.activity_id = Some(a);
    }
    r
}

fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        "[ -~]{0,20}[!-~]",
        "[!-~]{60,200}",
        Just("O'Brien && co &".to_owned()),
    ]
}

fn qid() -> impl Strategy<Value = QualifiedId> {
    prop_oneof!["ex:[a-z0-9_./-]{1,12}", "ex:[a-z0-9_]{70,120}"].prop_map(|s| id(&s))
}

fn time() -> impl Strategy<Value = Timestamp> {
    (0i64..2_000_000_000).prop_map(|s| common::ts(s - 1_700_000_000))
}

prop_compose! {
    fn record()(
        entity_id in "ex:target[0-9]{0,3}",
        entity_name in proptest::option::of(text()),
        generated_at in proptest::option::of(time()),
        location in proptest::option::of(text()),
        contact_name in proptest::option::of(text()),
        contact_id in proptest::option::of(qid()),
        contact_email in proptest::option::of("[a-z]{1,8}@[a-z]{1,8}\\.org"),
        activity in proptest::option::of((
            qid(),
            proptest::option::of(text()),
            proptest::option::of(time()),
            proptest::option::of(time()),
            proptest::option::of(text()),
            proptest::option::of("[0-9]\\.[0-9]"),
            proptest::collection::vec(qid(), 0..14),
            proptest::collection::vec(qid(), 0..4),
            proptest::collection::vec(("[a-z_]{1,10}", "[ -~]{0,30}[!-~]"), 0..5),
        )),
    ) -> LastStepRecord {
        let mut r = LastStepRecord::new(id(&entity_id));
        r.entity_name = entity_name;
        r.generated_at = generated_at;
        r.location = location;
        r.contact_name = contact_name;
        r.contact_id = contact_id;
        r.contact_email = contact_email;
        if let Some((a, name, start, end, desc, ver, used, siblings, params)) = activity {
            r.activity_id = Some(a);
            r.activity_name = name;
            r.activity_start = start;
            r.activity_end = end;
            r.description_name = desc;
            r.description_version = ver;
            r.used_ids = used.into_iter().filter(|u| *u != r.entity_id).collect();
            r.sibling_generated_ids = siblings.into_iter().filter(|u| *u != r.entity_id).collect();
            r.parameters = params;
        }
        r
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cards_round_trip(r in record()) {
        let cards = emit_header_cards(&r).unwrap();
        for card in &cards {
            prop_assert_eq!(card.len(), CARD_LEN);
            prop_assert!(card.is_ascii());
            let kw = card[..8].trim_end();
            prop_assert!(kw == "CONTINUE" || valid_keyword(kw), "bad keyword {:?}", kw);
        }
        prop_assert_eq!(parse_header_cards(&cards).unwrap(), r.clone());
        let fits = minimal_fits(&cards);
        prop_assert_eq!(fits.len() % 2880, 0);
        prop_assert_eq!(parse_header_cards(&read_primary_header(&fits).unwrap()).unwrap(), r);
    }

    #[test]
    fn build_matches_oracle(seed in any::<u64>()) {
        let doc = random_document(seed, GenConfig::small());
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.ingest_document(&doc).unwrap();
        for e in doc.entities.keys() {
            prop_assert_eq!(build_laststep(&store, e).unwrap(), oracle(&doc, e));
        }
    }

    #[test]
    fn reconstruction_is_monotone(seed in any::<u64>(), keep in proptest::collection::vec(any::<bool>(), 40)) {
        let doc = random_document(seed, GenConfig::small());
        let records: Vec<LastStepRecord> = doc
            .entities
            .keys()
            .filter(|e| !doc.is_stub(e))
            .map(|e| laststep_from_document(&doc, e, LastStepOptions::default()).unwrap())
            .collect();
        let subset: Vec<LastStepRecord> = records.iter().zip(keep.iter().cycle()).filter(|(_, k)| **k).map(|(r, _)| r.clone()).collect();
        let small = reconstruct(&subset, &doc.namespaces).unwrap();
        let big = reconstruct(&records, &doc.namespaces).unwrap();
        prop_assert!(small.record_ids().is_subset(&big.record_ids()));
        prop_assert!(small.used.keys().all(|k| big.used.contains_key(k)));
        prop_assert!(small.generations.keys().all(|k| big.generations.contains_key(k)));
    }
}

fn pipeline_store() -> (tempfile::TempDir, Store) {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    store.ingest_document(&expected_pipeline()).unwrap();
    (dir, store)
}

fn headers_for(store: &Store, skip: Option<&str>) -> Vec<LastStepRecord> {
    let doc = expected_pipeline();
    let generated: BTreeSet<_> = doc.generations.values().map(|g| g.entity.clone()).collect();
    generated
        .iter()
        .filter(|e| Some(e.local()) != skip)
        .map(|e| {
            let cards = emit_header_cards(&build_laststep(store, e).unwrap()).unwrap();
            parse_header_cards(&read_primary_header(&minimal_fits(&cards)).unwrap()).unwrap()
        })
        .collect()
}

#[test]
fn full_header_set_reconstructs_pipeline() {
    let (_dir, store) = pipeline_store();
    let captured = expected_pipeline();
    let rebuilt = reconstruct(&headers_for(&store, None), &captured.namespaces).unwrap();
    assert_eq!(shape(&rebuilt), shape(&captured));
    let raws: BTreeSet<_> = common::RAW.iter().map(|r| id(&format!("ex:{r}"))).collect();
    assert_eq!(rebuilt.incomplete_ids, raws);
    assert_eq!(rebuilt.parameters.len(), 4);
    assert_eq!(rebuilt.agents[&id(OPERATOR)].name, "Olga Operator");
}

#[test]
fn withheld_header_leaves_a_stub() {
    let (_dir, store) = pipeline_store();
    let captured = expected_pipeline();
    let rebuilt = reconstruct(&headers_for(&store, Some("reduced")), &captured.namespaces).unwrap();
    let reduced = id("ex:reduced");
    assert!(rebuilt.is_stub(&reduced));
    let mut want = shape(&captured);
    want.contacts.remove(&(reduced.clone(), id(OPERATOR)));
    assert_eq!(shape(&rebuilt), want);
}

#[test]
fn lone_record_gives_stub_inputs() {
    let (_dir, store) = pipeline_store();
    let r = build_laststep(&store, &id("ex:science")).unwrap();
    let doc = reconstruct(&[r], &expected_pipeline().namespaces).unwrap();
    assert!(doc.is_stub(&id("ex:reduced")));
    assert!(doc.is_stub(&id("ex:preview")));
    assert!(!doc.is_stub(&id("ex:science")));
    assert!(reconstruct(&[], &expected_pipeline().namespaces).unwrap().is_empty());
}

#[test]
fn header_errors() {
    let (_dir, store) = pipeline_store();
    let cards = emit_header_cards(&build_laststep(&store, &id("ex:science")).unwrap()).unwrap();
    let mut twice = cards.clone();
    twice.push(cards[0].clone());
    assert!(matches!(parse_header_cards(&twice), Err(LastStepError::DuplicateKeyword(k)) if k == "PRV_ID"));
    let plain = read_primary_header(&minimal_fits(&[])).unwrap();
    assert_eq!(parse_header_cards(&plain), Err(LastStepError::NoProvenance));
    assert!(matches!(build_laststep(&store, &id("ex:nope")), Err(LastStepError::NotFound(_))));
    let text: String = cards.iter().map(|c| format!("{}\n", c.trim_end())).collect();
    let padded: Vec<String> = read_card_text(&text).into_iter().map(|c| format!("{c:<80}")).collect();
    assert_eq!(parse_header_cards(&padded).unwrap(), build_laststep(&store, &id("ex:science")).unwrap());
}

#[test]
fn parameters_can_be_left_out() {
    let (_dir, store) = pipeline_store();
    let r = build_laststep_with(&store, &id("ex:calibrated"), LastStepOptions { parameters: false }).unwrap();
    assert!(r.parameters.is_empty());
    let full = build_laststep(&store, &id("ex:calibrated")).unwrap();
    assert_eq!(full.parameters, vec![("bias_level".to_owned(), "300".to_owned()), ("gain".to_owned(), "1.5".to_owned())]);
}
