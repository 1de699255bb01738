#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::{TimeZone, Utc};
use provkit::capture::RecorderSession;
use provkit::model::*;
use provkit::store::{Depth, Direction};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn id(s: &str) -> QualifiedId {
    QualifiedId::from_rendered(s).unwrap()
}

pub fn ts(secs: i64) -> Timestamp {
    Timestamp::from_datetime(Utc.timestamp_opt(1_700_000_000 + secs, 0).unwrap())
}

// ---------------------------------------------------------------------------
// Random valid documents

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub max_activities: usize,
    pub raw_entities: usize,
    pub agents: usize,
    pub descriptions: usize,
}

impl GenConfig {
    pub fn small() -> Self {
        GenConfig {
            max_activities: 12,
            raw_entities: 4,
            agents: 3,
            descriptions: 2,
        }
    }

    /// Up to about 1000 records.
    pub fn large() -> Self {
        GenConfig {
            max_activities: 320,
            raw_entities: 40,
            agents: 8,
            descriptions: 6,
        }
    }
}

fn maybe<T>(rng: &mut ChaCha8Rng, p: f64, f: impl FnOnce(&mut ChaCha8Rng) -> T) -> Option<T> {
    if rng.gen_bool(p) {
        Some(f(rng))
    } else {
        None
    }
}

fn attrs(rng: &mut ChaCha8Rng) -> Attributes {
    let mut a = Attributes::new();
    for _ in 0..rng.gen_range(0..3) {
        a.insert(format!("ex:k{}", rng.gen_range(0..4)), format!("v \"{}\"", rng.gen_range(0..100)));
    }
    a
}

fn role(rng: &mut ChaCha8Rng) -> Option<String> {
    maybe(rng, 0.3, |r| ["input", "calib", "log", "contact"][r.gen_range(0..4)].to_owned())
}

fn param_value(rng: &mut ChaCha8Rng) -> (String, ValueType) {
    match rng.gen_range(0..5) {
        0 => (format!("text {}", rng.gen_range(0..9)), ValueType::String),
        1 => (rng.gen_range(-50..50i64).to_string(), ValueType::Integer),
        2 => (format!("{:.2}", rng.gen_range(-5.0..5.0f64)), ValueType::Real),
        3 => (["true", "false"][rng.gen_range(0..2)].to_owned(), ValueType::Boolean),
        _ => (ts(rng.gen_range(0..100_000)).to_string(), ValueType::Timestamp),
    }
}

/// A random document that passes validation: activities are created in
/// topological order, each using earlier entities and generating fresh
/// ones, so the graph is acyclic and every entity has at most one
/// generator. Some raw inputs and agents are stubs.
pub fn random_document(seed: u64, cfg: GenConfig) -> ProvenanceDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ns = Namespaces::default();
    ns.insert("obs", "http://observatory.example/prov/").unwrap();
    let mut doc = ProvenanceDocument::new(ns);
    let prefix = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.2) { "obs" } else { "ex" };

    let mut agents = Vec::new();
    for n in 0..rng.gen_range(1..=cfg.agents) {
        let aid = QualifiedId::new(prefix(&mut rng), format!("agent{n}")).unwrap();
        if rng.gen_bool(0.15) {
            doc.ensure_agent_stub(&aid);
        } else {
            let kind = [AgentKind::Person, AgentKind::Organization, AgentKind::SoftwareAgent][rng.gen_range(0..3)];
            let mut ag = Agent::new(aid.clone(), &format!("Agent {n}"), kind);
            ag.email = maybe(&mut rng, 0.3, |_| format!("agent{n}@example.org"));
            ag.attributes = attrs(&mut rng);
            doc.add_agent(ag).unwrap();
        }
        agents.push(aid);
    }

    let mut descriptions = Vec::new();
    for n in 0..rng.gen_range(0..=cfg.descriptions) {
        let did = QualifiedId::new("ex", format!("desc{n}")).unwrap();
        let mut d = ActivityDescription::new(did.clone(), &format!("method {n}"));
        d.version = maybe(&mut rng, 0.5, |r| format!("{}.{}", r.gen_range(0..4), r.gen_range(0..10)));
        d.doc = maybe(&mut rng, 0.3, |_| "does things, carefully".to_owned());
        d.docurl = maybe(&mut rng, 0.3, |_| format!("http://docs.example/{n}"));
        d.code_reference = maybe(&mut rng, 0.3, |r| CodeReference {
            uri: format!("https://git.example/method{n}"),
            revision: maybe(r, 0.5, |_| "abc123".to_owned()),
        });
        doc.add_description(d).unwrap();
        descriptions.push(did);
    }

    let mut entities = Vec::new();
    let mut entity_count = 0;
    let mut new_entity = |doc: &mut ProvenanceDocument, rng: &mut ChaCha8Rng, stub: bool| {
        let eid = QualifiedId::new(prefix(rng), format!("e{entity_count}")).unwrap();
        entity_count += 1;
        if stub {
            doc.ensure_entity_stub(&eid);
        } else {
            let mut e = Entity::new(eid.clone());
            e.name = maybe(rng, 0.8, |r| format!("entity {}", r.gen_range(0..1000)));
            e.location = maybe(rng, 0.3, |r| format!("file:///data/{}.fits", r.gen_range(0..1000)));
            e.comment = maybe(rng, 0.1, |_| "checked".to_owned());
            e.attributes = attrs(rng);
            doc.add_entity(e).unwrap();
        }
        eid
    };

    for _ in 0..rng.gen_range(1..=cfg.raw_entities) {
        let stub = rng.gen_bool(0.2);
        let e = new_entity(&mut doc, &mut rng, stub);
        entities.push(e);
    }

    for n in 0..rng.gen_range(1..=cfg.max_activities) {
        let aid = QualifiedId::new(prefix(&mut rng), format!("act{n}")).unwrap();
        let start = rng.gen_range(0..100_000);
        let mut a = Activity::new(aid.clone());
        a.name = maybe(&mut rng, 0.9, |r| format!("step {}", r.gen_range(0..50)));
        a.start_time = maybe(&mut rng, 0.7, |_| ts(start));
        if a.start_time.is_some() {
            a.end_time = maybe(&mut rng, 0.7, |r| ts(start + r.gen_range(0..500)));
        }
        if !descriptions.is_empty() {
            a.description_ref = maybe(&mut rng, 0.5, |r| descriptions.choose(r).unwrap().clone());
        }
        a.attributes = attrs(&mut rng);
        doc.add_activity(a).unwrap();

        // Prefer recent entities so chains get long.
        let used: BTreeSet<QualifiedId> = (0..rng.gen_range(0..=3))
            .map(|_| {
                let lo = entities.len().saturating_sub(12);
                let i = if rng.gen_bool(0.7) {
                    rng.gen_range(lo..entities.len())
                } else {
                    rng.gen_range(0..entities.len())
                };
                entities[i].clone()
            })
            .collect();
        for e in used {
            let mut u = Used::new(aid.clone(), e);
            u.role = role(&mut rng);
            u.time = maybe(&mut rng, 0.3, |_| ts(start));
            doc.add_used(u).unwrap();
        }
        for _ in 0..rng.gen_range(1..=2) {
            let e = new_entity(&mut doc, &mut rng, false);
            let mut g = WasGeneratedBy::new(e.clone(), aid.clone());
            g.role = role(&mut rng);
            g.time = maybe(&mut rng, 0.3, |_| ts(start));
            doc.add_generation(g).unwrap();
            if rng.gen_bool(0.3) {
                let mut at = WasAttributedTo::new(e.clone(), agents.choose(&mut rng).unwrap().clone());
                at.role = role(&mut rng);
                doc.add_attribution(at).unwrap();
            }
            entities.push(e);
        }
        if rng.gen_bool(0.5) {
            let mut w = WasAssociatedWith::new(aid.clone(), agents.choose(&mut rng).unwrap().clone());
            w.role = role(&mut rng);
            doc.add_association(w).unwrap();
        }
        for p in 0..rng.gen_range(0..3) {
            let (value, vt) = param_value(&mut rng);
            doc.add_parameter(Parameter::new(aid.clone(), &format!("p{p}"), &value, vt)).unwrap();
        }
    }
    let report = validate_document(&doc);
    assert!(!report.has_errors(), "generator produced an invalid document: {:?}", report.findings);
    doc
}

pub fn random_start(rng: &mut ChaCha8Rng, doc: &ProvenanceDocument) -> (QualifiedId, Direction) {
    let pool: Vec<QualifiedId> = doc.entities.keys().chain(doc.activities.keys()).cloned().collect();
    let dir = if rng.gen_bool(0.5) { Direction::Backward } else { Direction::Forward };
    (pool.choose(rng).unwrap().clone(), dir)
}

// ---------------------------------------------------------------------------
// Traversal oracle

/// Brute-force traversal closure computed from the relation lists alone:
/// activity hop distances by repeated relaxation, then the induced
/// document built record by record.
pub fn oracle_closure(
    doc: &ProvenanceDocument,
    start: &QualifiedId,
    depth: Depth,
    dir: Direction,
) -> ProvenanceDocument {
    let limit = match depth {
        Depth::All => u32::MAX,
        Depth::Hops(n) => n,
    };
    let mut out = ProvenanceDocument::new(doc.namespaces.clone());
    let is_entity = doc.entities.contains_key(start);
    let is_activity = doc.activities.contains_key(start);
    if (!is_entity && !is_activity) || limit == 0 {
        copy_record(doc, &mut out, start);
        return out;
    }

    let gens: Vec<(&QualifiedId, &QualifiedId)> = doc.generations.values().map(|g| (&g.entity, &g.activity)).collect();
    let uses: Vec<(&QualifiedId, &QualifiedId)> = doc.used.values().map(|u| (&u.activity, &u.entity)).collect();

    let mut dist: BTreeMap<QualifiedId, u32> = BTreeMap::new();
    if is_activity {
        dist.insert(start.clone(), 1);
    } else {
        for (e, a) in &gens {
            if dir == Direction::Backward && *e == start {
                dist.insert((*a).clone(), 1);
            }
        }
        for (a, e) in &uses {
            if dir == Direction::Forward && *e == start {
                dist.insert((*a).clone(), 1);
            }
        }
    }
    loop {
        let mut changed = false;
        let snapshot = dist.clone();
        for (a, &k) in &snapshot {
            // entities crossed from `a` to reach the next activity
            let via: Vec<&QualifiedId> = match dir {
                Direction::Backward => uses.iter().filter(|(x, _)| *x == a).map(|(_, e)| *e).collect(),
                Direction::Forward => gens.iter().filter(|(_, x)| *x == a).map(|(e, _)| *e).collect(),
            };
            for e in via {
                let next: Vec<&QualifiedId> = match dir {
                    Direction::Backward => gens.iter().filter(|(x, _)| *x == e).map(|(_, b)| *b).collect(),
                    Direction::Forward => uses.iter().filter(|(_, x)| *x == e).map(|(b, _)| *b).collect(),
                };
                for b in next {
                    let d = k.saturating_add(1);
                    if dist.get(b).is_none_or(|&old| d < old) {
                        dist.insert(b.clone(), d);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let acts: BTreeSet<QualifiedId> = dist.into_iter().filter(|(_, d)| *d <= limit).map(|(a, _)| a).collect();
    let mut ents: BTreeSet<QualifiedId> = BTreeSet::new();
    if is_entity {
        ents.insert(start.clone());
    }
    for (e, a) in &gens {
        if acts.contains(*a) {
            ents.insert((*e).clone());
        }
    }
    if dir == Direction::Backward {
        for (a, e) in &uses {
            if acts.contains(*a) {
                ents.insert((*e).clone());
            }
        }
    }

    for e in &ents {
        copy_record(doc, &mut out, e);
    }
    for a in &acts {
        copy_record(doc, &mut out, a);
        if let Some(d) = &doc.activities[a].description_ref {
            copy_record(doc, &mut out, d);
        }
    }
    for (k, p) in &doc.parameters {
        if acts.contains(&p.activity) {
            out.parameters.insert(k.clone(), p.clone());
        }
    }
    for (k, u) in &doc.used {
        if acts.contains(&u.activity) && ents.contains(&u.entity) {
            out.used.insert(k.clone(), u.clone());
        }
    }
    for (k, g) in &doc.generations {
        if acts.contains(&g.activity) && ents.contains(&g.entity) {
            out.generations.insert(k.clone(), g.clone());
        }
    }
    for (k, w) in &doc.associations {
        if acts.contains(&w.activity) {
            out.associations.insert(k.clone(), w.clone());
            copy_record(doc, &mut out, &w.agent);
        }
    }
    for (k, at) in &doc.attributions {
        if ents.contains(&at.entity) {
            out.attributions.insert(k.clone(), at.clone());
            copy_record(doc, &mut out, &at.agent);
        }
    }
    out
}

fn copy_record(from: &ProvenanceDocument, to: &mut ProvenanceDocument, id: &QualifiedId) {
    if let Some(r) = from.entities.get(id) {
        to.entities.insert(id.clone(), r.clone());
    } else if let Some(r) = from.activities.get(id) {
        to.activities.insert(id.clone(), r.clone());
    } else if let Some(r) = from.agents.get(id) {
        to.agents.insert(id.clone(), r.clone());
    } else if let Some(r) = from.descriptions.get(id) {
        to.descriptions.insert(id.clone(), r.clone());
    } else {
        return;
    }
    if from.is_stub(id) {
        to.incomplete_ids.insert(id.clone());
    }
}

// ---------------------------------------------------------------------------
// The three-stage synthetic pipeline

pub struct Stage {
    pub name: &'static str,
    pub inputs: &'static [(&'static str, Option<&'static str>)],
    pub outputs: &'static [&'static str],
    pub params: &'static [(&'static str, &'static str, ValueType)],
}

pub const STAGES: [Stage; 3] = [
    Stage {
        name: "calibrate",
        inputs: &[("raw1", Some("science")), ("raw2", Some("dark"))],
        outputs: &["calibrated", "calib_log"],
        params: &[("gain", "1.5", ValueType::Real), ("bias_level", "300", ValueType::Integer)],
    },
    Stage {
        name: "reduce",
        inputs: &[("calibrated", None)],
        outputs: &["reduced", "reduce_qc"],
        params: &[("method", "median", ValueType::String)],
    },
    Stage {
        name: "science",
        inputs: &[("reduced", None)],
        outputs: &["science", "preview"],
        params: &[("snr_min", "5.0", ValueType::Real)],
    },
];

pub const RAW: [&str; 2] = ["raw1", "raw2"];
pub const TOKEN: &str = "c1";
pub const OPERATOR: &str = "ex:operator";
pub const PIPELINE: &str = "ex:pipeline";

pub fn stage_activity(i: usize) -> QualifiedId {
    id(&format!("ex:{}_{}_{TOKEN}", STAGES[i].name, i + 1))
}

pub fn pipeline_entities() -> Vec<&'static str> {
    RAW.iter().copied().chain(STAGES.iter().flat_map(|s| s.outputs.iter().copied())).collect()
}

fn operator() -> Agent {
    let mut a = Agent::new(id(OPERATOR), "Olga Operator", AgentKind::Person);
    a.email = Some("olga@observatory.example".into());
    a
}

fn pipeline_agent() -> Agent {
    Agent::new(id(PIPELINE), "reduction pipeline", AgentKind::SoftwareAgent)
}

fn pipeline_entity(name: &str) -> Entity {
    let mut e = Entity::named(id(&format!("ex:{name}")), name);
    e.location = Some(format!("file:///archive/{name}.fits"));
    e
}

/// Runs the pipeline script through the recorder with a clock that ticks
/// one second per call, and returns the event log text.
pub fn record_pipeline() -> String {
    let mut tick = 0;
    let clock = move || {
        tick += 1;
        ts(tick)
    };
    let mut rec = RecorderSession::new(Vec::new(), Namespaces::default())
        .with_token(TOKEN)
        .with_clock(clock);
    rec.declare_agent(&operator()).unwrap();
    rec.declare_agent(&pipeline_agent()).unwrap();
    for name in pipeline_entities() {
        rec.declare_entity(&pipeline_entity(name)).unwrap();
    }
    for stage in &STAGES {
        let h = rec.begin_activity(stage.name, None).unwrap();
        for (input, role) in stage.inputs {
            rec.record_used(&h, &id(&format!("ex:{input}")), *role).unwrap();
        }
        for (name, value, vt) in stage.params {
            rec.set_parameter(&h, name, value, *vt).unwrap();
        }
        rec.associate(&h, &id(PIPELINE), Some("executor")).unwrap();
        for out in stage.outputs {
            rec.record_generated(&h, &id(&format!("ex:{out}")), None).unwrap();
        }
        rec.end_activity(&h).unwrap();
        for out in stage.outputs {
            rec.attribute(&id(&format!("ex:{out}")), &id(OPERATOR), Some("contact")).unwrap();
        }
    }
    String::from_utf8(rec.into_sink()).unwrap()
}

/// The same pipeline built directly through the model API, replaying the
/// recorder's clock ticks.
pub fn expected_pipeline() -> ProvenanceDocument {
    let mut doc = ProvenanceDocument::default();
    doc.add_agent(operator()).unwrap();
    doc.add_agent(pipeline_agent()).unwrap();
    for name in pipeline_entities() {
        doc.add_entity(pipeline_entity(name)).unwrap();
    }
    let mut tick = 0;
    let mut next = || {
        tick += 1;
        ts(tick)
    };
    for (i, stage) in STAGES.iter().enumerate() {
        let aid = stage_activity(i);
        let mut act = Activity::named(aid.clone(), stage.name);
        act.start_time = Some(next());
        for (input, role) in stage.inputs {
            let mut u = Used::new(aid.clone(), id(&format!("ex:{input}")));
            u.role = role.map(str::to_owned);
            u.time = Some(next());
            doc.add_used(u).unwrap();
        }
        for (name, value, vt) in stage.params {
            doc.add_parameter(Parameter::new(aid.clone(), name, value, *vt)).unwrap();
        }
        let mut w = WasAssociatedWith::new(aid.clone(), id(PIPELINE));
        w.role = Some("executor".into());
        doc.add_association(w).unwrap();
        for out in stage.outputs {
            let mut g = WasGeneratedBy::new(id(&format!("ex:{out}")), aid.clone());
            g.time = Some(next());
            doc.add_generation(g).unwrap();
        }
        act.end_time = Some(next());
        doc.add_activity(act).unwrap();
        for out in stage.outputs {
            let mut at = WasAttributedTo::new(id(&format!("ex:{out}")), id(OPERATOR));
            at.role = Some("contact".into());
            doc.add_attribution(at).unwrap();
        }
    }
    doc
}

/// A linear chain `e0 <- a1 <- e1 <- ... <- aN <- eN`.
pub fn linear_chain(n: usize) -> ProvenanceDocument {
    let mut doc = ProvenanceDocument::default();
    doc.add_entity(Entity::named(id("ex:e0"), "e0")).unwrap();
    for i in 1..=n {
        let a = id(&format!("ex:a{i}"));
        let e = id(&format!("ex:e{i}"));
        doc.add_activity(Activity::named(a.clone(), "step")).unwrap();
        doc.add_entity(Entity::named(e.clone(), "product")).unwrap();
        doc.add_used(Used::new(a.clone(), id(&format!("ex:e{}", i - 1)))).unwrap();
        doc.add_generation(WasGeneratedBy::new(e, a)).unwrap();
    }
    doc
}

/// Set view used by the reconstruction criterion.
#[derive(Debug, PartialEq, Eq)]
pub struct GraphShape {
    pub entities: BTreeSet<QualifiedId>,
    pub activities: BTreeSet<QualifiedId>,
    pub used: BTreeSet<(QualifiedId, QualifiedId)>,
    pub generated: BTreeSet<(QualifiedId, QualifiedId)>,
    pub contacts: BTreeSet<(QualifiedId, QualifiedId)>,
}

pub fn shape(doc: &ProvenanceDocument) -> GraphShape {
    GraphShape {
        entities: doc.entities.keys().cloned().collect(),
        activities: doc.activities.keys().cloned().collect(),
        used: doc.used.values().map(|u| (u.activity.clone(), u.entity.clone())).collect(),
        generated: doc.generations.values().map(|g| (g.entity.clone(), g.activity.clone())).collect(),
        contacts: doc
            .attributions
            .values()
            .filter(|a| a.role.as_deref() == Some("contact"))
            .map(|a| (a.entity.clone(), a.agent.clone()))
            .collect(),
    }
}
