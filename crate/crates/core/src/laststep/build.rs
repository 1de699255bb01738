use super::{LastStepError, LastStepRecord};
use crate::model::{
    merge_into, vocab, Activity, Agent, Entity, Namespaces, Parameter, ProvenanceDocument, QualifiedId, Used,
    ValueType, WasAttributedTo, WasGeneratedBy,
};
use crate::store::{Depth, Direction, Store};

/// Role that marks the preferred contact attribution.
pub const CONTACT_ROLE: &str = "contact";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LastStepOptions {
    pub parameters: bool,
}

impl Default for LastStepOptions {
    fn default() -> Self {
        LastStepOptions { parameters: true }
    }
}

pub fn build_laststep(store: &Store, entity_id: &QualifiedId) -> Result<LastStepRecord, LastStepError> {
    build_laststep_with(store, entity_id, LastStepOptions::default())
}

pub fn build_laststep_with(
    store: &Store,
    entity_id: &QualifiedId,
    opts: LastStepOptions,
) -> Result<LastStepRecord, LastStepError> {
    if !store.snapshot().document().entities.contains_key(entity_id) {
        return Err(LastStepError::NotFound(entity_id.clone()));
    }
    let step = store.traverse(entity_id, Depth::Hops(1), Direction::Backward)?;
    laststep_from_document(&step, entity_id, opts)
}

/// Projects a document onto the last-step fields of `entity_id`. Applied
/// to a one-hop backward traversal this is exactly [`build_laststep`].
pub fn laststep_from_document(
    doc: &ProvenanceDocument,
    entity_id: &QualifiedId,
    opts: LastStepOptions,
) -> Result<LastStepRecord, LastStepError> {
    let entity = doc
        .entities
        .get(entity_id)
        .ok_or_else(|| LastStepError::NotFound(entity_id.clone()))?;
    let mut r = LastStepRecord::new(entity_id.clone());
    r.entity_name = entity.name.clone();
    r.generated_at = entity.generated_at;
    r.location = entity.location.clone();

    let attributed: Vec<_> = doc.attributions.values().filter(|a| &a.entity == entity_id).collect();
    let contact = attributed
        .iter()
        .filter(|a| a.role.as_deref() == Some(CONTACT_ROLE))
        .map(|a| &a.agent)
        .min()
        .or_else(|| attributed.iter().map(|a| &a.agent).min());
    if let Some(agent_id) = contact {
        r.contact_id = Some(agent_id.clone());
        if let Some(agent) = doc.agents.get(agent_id) {
            r.contact_name = Some(agent.name.clone()).filter(|n| !n.is_empty());
            r.contact_email = agent.email.clone();
        }
    }

    if let Some(activity_id) = doc.generator_of(entity_id) {
        let activity = &doc.activities[activity_id];
        r.activity_id = Some(activity_id.clone());
        r.activity_name = activity.name.clone();
        r.activity_start = activity.start_time;
        r.activity_end = activity.end_time;
        if let Some(desc) = activity.description_ref.as_ref().and_then(|d| doc.descriptions.get(d)) {
            r.description_name = Some(desc.name.clone()).filter(|n| !n.is_empty());
            r.description_version = desc.version.clone();
        }
        r.used_ids = doc
            .used
            .values()
            .filter(|u| &u.activity == activity_id && &u.entity != entity_id)
            .map(|u| u.entity.clone())
            .collect();
        r.used_ids.dedup();
        r.sibling_generated_ids = doc
            .generations
            .values()
            .filter(|g| &g.activity == activity_id && &g.entity != entity_id)
            .map(|g| g.entity.clone())
            .collect();
        r.sibling_generated_ids.sort();
        r.sibling_generated_ids.dedup();
        if opts.parameters {
            r.parameters = doc
                .parameters_of(activity_id)
                .map(|p| (p.name.clone(), p.value.clone()))
                .collect();
        }
    }
    Ok(r)
}

fn check_prefix(ns: &Namespaces, id: &QualifiedId) -> Result<(), LastStepError> {
    if ns.contains(id.prefix()) {
        Ok(())
    } else {
        Err(LastStepError::Model(crate::model::ModelError::UnknownPrefix(id.prefix().to_owned())))
    }
}

/// The one-step document described by a single record.
pub fn expand_record(record: &LastStepRecord, ns: &Namespaces) -> Result<ProvenanceDocument, LastStepError> {
    record.check()?;
    let ids = std::iter::once(&record.entity_id)
        .chain(record.contact_id.iter())
        .chain(record.activity_id.iter())
        .chain(record.used_ids.iter())
        .chain(record.sibling_generated_ids.iter());
    for id in ids {
        check_prefix(ns, id)?;
    }

    let mut doc = ProvenanceDocument::new(ns.clone());
    let mut entity = Entity::new(record.entity_id.clone());
    entity.name = record.entity_name.clone();
    entity.location = record.location.clone();
    entity.generated_at = record.generated_at;
    doc.add_entity(entity)?;

    if let Some(agent_id) = &record.contact_id {
        match &record.contact_name {
            Some(name) => {
                let mut agent = Agent::stub(agent_id.clone());
                agent.name = name.clone();
                agent.email = record.contact_email.clone();
                doc.add_agent(agent)?;
            }
            None => doc.ensure_agent_stub(agent_id),
        }
        let mut attribution = WasAttributedTo::new(record.entity_id.clone(), agent_id.clone());
        attribution.role = Some(CONTACT_ROLE.to_owned());
        doc.add_attribution(attribution)?;
    }

    if let Some(activity_id) = &record.activity_id {
        let mut activity = Activity::new(activity_id.clone());
        activity.name = record.activity_name.clone();
        activity.start_time = record.activity_start;
        activity.end_time = record.activity_end;
        if let Some(n) = &record.description_name {
            activity.attributes.insert(vocab::DESC_NAME.into(), n.clone());
        }
        if let Some(v) = &record.description_version {
            activity.attributes.insert(vocab::DESC_VERSION.into(), v.clone());
        }
        doc.add_activity(activity)?;
        doc.add_generation(WasGeneratedBy::new(record.entity_id.clone(), activity_id.clone()))?;
        for used in &record.used_ids {
            doc.ensure_entity_stub(used);
            doc.add_used(Used::new(activity_id.clone(), used.clone()))?;
        }
        for sibling in &record.sibling_generated_ids {
            doc.ensure_entity_stub(sibling);
            doc.add_generation(WasGeneratedBy::new(sibling.clone(), activity_id.clone()))?;
        }
        for (name, value) in &record.parameters {
            doc.add_parameter(Parameter::new(activity_id.clone(), name, value, ValueType::String))?;
        }
    }
    Ok(doc)
}

/// Rebuilds a provenance graph from last-step records by merging their
/// one-step documents. Ids that are referenced but described by no record
/// stay stubs.
pub fn reconstruct(records: &[LastStepRecord], ns: &Namespaces) -> Result<ProvenanceDocument, LastStepError> {
    let mut doc = ProvenanceDocument::new(ns.clone());
    for record in records {
        merge_into(&mut doc, &expand_record(record, ns)?)?;
    }
    Ok(doc)
}
