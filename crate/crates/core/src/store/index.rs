use std::collections::{BTreeMap, BTreeSet};

use crate::model::{ProvenanceDocument, QualifiedId};

type Adjacency = BTreeMap<QualifiedId, BTreeSet<QualifiedId>>;

/// Adjacency indexes over a record set. Always derivable from the records:
/// [`StoreIndex::build`] is the only constructor.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StoreIndex {
    /// entity → generating activities
    pub generators: Adjacency,
    /// activity → used entities
    pub used_by: Adjacency,
    /// entity → activities that used it
    pub users: Adjacency,
    /// activity → generated entities
    pub outputs: Adjacency,
    /// activity → associated agents
    pub activity_agents: Adjacency,
    /// entity → attributed agents
    pub entity_agents: Adjacency,
    /// activity → parameter names
    pub parameters: BTreeMap<QualifiedId, BTreeSet<String>>,
}

fn link(map: &mut Adjacency, from: &QualifiedId, to: &QualifiedId) {
    map.entry(from.clone()).or_default().insert(to.clone());
}

impl StoreIndex {
    pub fn build(doc: &ProvenanceDocument) -> Self {
        let mut index = StoreIndex::default();
        for g in doc.generations.values() {
            link(&mut index.generators, &g.entity, &g.activity);
            link(&mut index.outputs, &g.activity, &g.entity);
        }
        for u in doc.used.values() {
            link(&mut index.used_by, &u.activity, &u.entity);
            link(&mut index.users, &u.entity, &u.activity);
        }
        for a in doc.associations.values() {
            link(&mut index.activity_agents, &a.activity, &a.agent);
        }
        for a in doc.attributions.values() {
            link(&mut index.entity_agents, &a.entity, &a.agent);
        }
        for (activity, name) in doc.parameters.keys() {
            index
                .parameters
                .entry(activity.clone())
                .or_default()
                .insert(name.clone());
        }
        index
    }

    pub(crate) fn neighbours<'a>(map: &'a Adjacency, id: &QualifiedId) -> impl Iterator<Item = &'a QualifiedId> {
        map.get(id).into_iter().flatten()
    }
}
