use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::index::StoreIndex;
use super::StoreError;
use crate::model::{ProvenanceDocument, QualifiedId, RecordClass, RelationKey};

/// Number of activity hops to follow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Depth {
    All,
    Hops(u32),
}

impl Depth {
    fn allows(&self, step: u32) -> bool {
        match self {
            Depth::All => true,
            Depth::Hops(n) => step <= *n,
        }
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::All => f.write_str("ALL"),
            Depth::Hops(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Depth {
    type Err = String;

    /// `ALL` (any case) or a non-negative integer.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Depth::All);
        }
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("depth must be ALL or a non-negative integer, got {s:?}"));
        }
        s.parse::<u32>()
            .map(Depth::Hops)
            .map_err(|_| format!("depth {s} is out of range"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Backward,
    Forward,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Backward => "BACKWARD",
            Direction::Forward => "FORWARD",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("backward") {
            Ok(Direction::Backward)
        } else if s.eq_ignore_ascii_case("forward") {
            Ok(Direction::Forward)
        } else {
            Err(format!("direction must be BACKWARD or FORWARD, got {s:?}"))
        }
    }
}

/// Collects the subgraph reachable from `start` and returns it as a
/// document induced on the visited entities and activities, plus the
/// agents, parameters and descriptions attached to them.
pub fn traverse_with_index(
    doc: &ProvenanceDocument,
    index: &StoreIndex,
    start: &QualifiedId,
    depth: Depth,
    direction: Direction,
) -> Result<ProvenanceDocument, StoreError> {
    let class = doc
        .class_of(start)
        .ok_or_else(|| StoreError::NotFound(start.clone()))?;

    let mut entities = BTreeSet::new();
    let mut activities = BTreeSet::new();
    match class {
        RecordClass::Entity => {
            entities.insert(start.clone());
        }
        RecordClass::Activity => {
            activities.insert(start.clone());
        }
        RecordClass::Agent | RecordClass::ActivityDescription => {
            return Ok(only_record(doc, start));
        }
    }
    if depth == Depth::Hops(0) {
        return Ok(only_record(doc, start));
    }

    let mut frontier: BTreeSet<QualifiedId> = BTreeSet::new();
    let mut step = 1;
    if class == RecordClass::Activity {
        let own_used: BTreeSet<_> = StoreIndex::neighbours(&index.used_by, start).cloned().collect();
        let own_out: BTreeSet<_> = StoreIndex::neighbours(&index.outputs, start).cloned().collect();
        match direction {
            Direction::Backward => {
                entities.extend(own_used.iter().cloned());
                entities.extend(own_out);
                frontier = own_used;
            }
            Direction::Forward => {
                entities.extend(own_out.iter().cloned());
                frontier = own_out;
            }
        }
        step += 1;
    } else {
        frontier.insert(start.clone());
    }

    while depth.allows(step) && !frontier.is_empty() {
        let mut next = BTreeSet::new();
        for e in &frontier {
            let reached: Vec<&QualifiedId> = match direction {
                Direction::Backward => StoreIndex::neighbours(&index.generators, e).collect(),
                Direction::Forward => StoreIndex::neighbours(&index.users, e).collect(),
            };
            for a in reached {
                if !activities.insert(a.clone()) {
                    continue;
                }
                for out in StoreIndex::neighbours(&index.outputs, a) {
                    if entities.insert(out.clone()) && direction == Direction::Forward {
                        next.insert(out.clone());
                    }
                }
                if direction == Direction::Backward {
                    for input in StoreIndex::neighbours(&index.used_by, a) {
                        if entities.insert(input.clone()) {
                            next.insert(input.clone());
                        }
                    }
                }
            }
        }
        frontier = next;
        step += 1;
    }

    Ok(induced(doc, index, &entities, &activities))
}

fn only_record(doc: &ProvenanceDocument, id: &QualifiedId) -> ProvenanceDocument {
    let mut out = ProvenanceDocument::new(doc.namespaces.clone());
    if let Some(r) = doc.entities.get(id) {
        out.entities.insert(id.clone(), r.clone());
    }
    if let Some(r) = doc.activities.get(id) {
        out.activities.insert(id.clone(), r.clone());
    }
    if let Some(r) = doc.agents.get(id) {
        out.agents.insert(id.clone(), r.clone());
    }
    if let Some(r) = doc.descriptions.get(id) {
        out.descriptions.insert(id.clone(), r.clone());
    }
    if doc.is_stub(id) {
        out.incomplete_ids.insert(id.clone());
    }
    out
}

/// The document restricted to `entities` and `activities`, their mutual
/// relations, and everything attached to them.
pub(crate) fn induced(
    doc: &ProvenanceDocument,
    index: &StoreIndex,
    entities: &BTreeSet<QualifiedId>,
    activities: &BTreeSet<QualifiedId>,
) -> ProvenanceDocument {
    let mut out = ProvenanceDocument::new(doc.namespaces.clone());
    let mut agents = BTreeSet::new();
    let mut descriptions = BTreeSet::new();

    for e in entities {
        out.entities.insert(e.clone(), doc.entities[e].clone());
        agents.extend(StoreIndex::neighbours(&index.entity_agents, e).cloned());
    }
    for a in activities {
        let activity = &doc.activities[a];
        out.activities.insert(a.clone(), activity.clone());
        agents.extend(StoreIndex::neighbours(&index.activity_agents, a).cloned());
        if let Some(d) = &activity.description_ref {
            if doc.descriptions.contains_key(d) {
                descriptions.insert(d.clone());
            }
        }
        for p in doc.parameters_of(a) {
            out.parameters.insert(p.key(), p.clone());
        }
    }
    for g in agents.iter().filter_map(|id| doc.agents.get(id)) {
        out.agents.insert(g.id.clone(), g.clone());
    }
    for d in descriptions.iter().filter_map(|id| doc.descriptions.get(id)) {
        out.descriptions.insert(d.id.clone(), d.clone());
    }
    for a in activities {
        for e in StoreIndex::neighbours(&index.used_by, a).filter(|e| entities.contains(*e)) {
            out.used.extend(between(&doc.used, a, e));
        }
        for g in StoreIndex::neighbours(&index.activity_agents, a) {
            out.associations.extend(between(&doc.associations, a, g));
        }
    }
    for e in entities {
        for a in StoreIndex::neighbours(&index.generators, e).filter(|a| activities.contains(*a)) {
            out.generations.extend(between(&doc.generations, e, a));
        }
        for g in StoreIndex::neighbours(&index.entity_agents, e) {
            out.attributions.extend(between(&doc.attributions, e, g));
        }
    }
    out.incomplete_ids = out
        .record_ids()
        .into_iter()
        .filter(|id| doc.is_stub(id))
        .collect();
    out
}

/// Every relation from `subject` to `object`, whatever its role.
fn between<'a, V: Clone>(
    map: &'a BTreeMap<RelationKey, V>,
    subject: &'a QualifiedId,
    object: &'a QualifiedId,
) -> impl Iterator<Item = (RelationKey, V)> + 'a {
    map.range((subject.clone(), object.clone(), None)..)
        .take_while(move |((s, o, _), _)| s == subject && o == object)
        .map(|(k, v)| (k.clone(), v.clone()))
}

/// Convenience form of [`traverse_with_index`] for a document that is not
/// in a store.
pub fn traverse_document(
    doc: &ProvenanceDocument,
    start: &QualifiedId,
    depth: Depth,
    direction: Direction,
) -> Result<ProvenanceDocument, StoreError> {
    traverse_with_index(doc, &StoreIndex::build(doc), start, depth, direction)
}
