use std::collections::{BTreeMap, BTreeSet};

use super::records::*;
use super::{ModelError, Namespaces, QualifiedId};

/// An in-memory provenance graph.
///
/// Records are keyed by id and relations by `(subject, object, role)`, so
/// per-class id uniqueness and relation de-duplication hold structurally.
/// Cross-class id collisions, dangling references, generation uniqueness and
/// acyclicity are checked by [`validate_document`](super::validate_document).
///
/// A *stub* is a record known only by reference: it carries an id and
/// nothing else, and its id is listed in `incomplete_ids`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProvenanceDocument {
    pub namespaces: Namespaces,
    pub entities: BTreeMap<QualifiedId, Entity>,
    pub activities: BTreeMap<QualifiedId, Activity>,
    pub agents: BTreeMap<QualifiedId, Agent>,
    pub descriptions: BTreeMap<QualifiedId, ActivityDescription>,
    pub parameters: BTreeMap<(QualifiedId, String), Parameter>,
    pub used: BTreeMap<RelationKey, Used>,
    pub generations: BTreeMap<RelationKey, WasGeneratedBy>,
    pub associations: BTreeMap<RelationKey, WasAssociatedWith>,
    pub attributions: BTreeMap<RelationKey, WasAttributedTo>,
    pub incomplete_ids: BTreeSet<QualifiedId>,
}

/// Fills empty fields of `into` from `from`, failing when both carry
/// different non-empty values.
pub(crate) fn merge_field<T: Clone + PartialEq>(
    into: &mut Option<T>,
    from: &Option<T>,
    id: &QualifiedId,
) -> Result<(), ModelError> {
    match (into.as_ref(), from) {
        (Some(a), Some(b)) if a != b => Err(ModelError::ConflictingRecord(id.to_string())),
        (None, Some(b)) => {
            *into = Some(b.clone());
            Ok(())
        }
        _ => Ok(()),
    }
}

fn merge_string(into: &mut String, from: &str, id: &QualifiedId) -> Result<(), ModelError> {
    if from.is_empty() {
        Ok(())
    } else if into.is_empty() {
        *into = from.to_owned();
        Ok(())
    } else if into != from {
        Err(ModelError::ConflictingRecord(id.to_string()))
    } else {
        Ok(())
    }
}

fn merge_attributes(into: &mut Attributes, from: &Attributes, id: &QualifiedId) -> Result<(), ModelError> {
    for (key, value) in from {
        match into.get(key) {
            Some(existing) if existing != value => {
                return Err(ModelError::ConflictingRecord(id.to_string()))
            }
            Some(_) => {}
            None => {
                into.insert(key.clone(), value.clone());
            }
        }
    }
    Ok(())
}

/// Field-wise union of two records with the same id.
pub trait MergeRecord: Sized {
    fn merge_from(&mut self, other: &Self) -> Result<(), ModelError>;
}

impl MergeRecord for Entity {
    fn merge_from(&mut self, other: &Self) -> Result<(), ModelError> {
        let id = self.id.clone();
        merge_field(&mut self.name, &other.name, &id)?;
        merge_field(&mut self.location, &other.location, &id)?;
        merge_field(&mut self.generated_at, &other.generated_at, &id)?;
        merge_field(&mut self.comment, &other.comment, &id)?;
        merge_attributes(&mut self.attributes, &other.attributes, &id)
    }
}

impl MergeRecord for Activity {
    fn merge_from(&mut self, other: &Self) -> Result<(), ModelError> {
        let id = self.id.clone();
        merge_field(&mut self.name, &other.name, &id)?;
        merge_field(&mut self.start_time, &other.start_time, &id)?;
        merge_field(&mut self.end_time, &other.end_time, &id)?;
        merge_field(&mut self.description_ref, &other.description_ref, &id)?;
        merge_field(&mut self.comment, &other.comment, &id)?;
        merge_attributes(&mut self.attributes, &other.attributes, &id)
    }
}

impl MergeRecord for Agent {
    fn merge_from(&mut self, other: &Self) -> Result<(), ModelError> {
        let id = self.id.clone();
        merge_string(&mut self.name, &other.name, &id)?;
        merge_field(&mut self.kind, &other.kind, &id)?;
        merge_field(&mut self.email, &other.email, &id)?;
        merge_attributes(&mut self.attributes, &other.attributes, &id)
    }
}

impl MergeRecord for ActivityDescription {
    fn merge_from(&mut self, other: &Self) -> Result<(), ModelError> {
        let id = self.id.clone();
        merge_string(&mut self.name, &other.name, &id)?;
        merge_field(&mut self.version, &other.version, &id)?;
        merge_field(&mut self.doc, &other.doc, &id)?;
        merge_field(&mut self.docurl, &other.docurl, &id)?;
        merge_field(&mut self.code_reference, &other.code_reference, &id)
    }
}

impl MergeRecord for Parameter {
    fn merge_from(&mut self, other: &Self) -> Result<(), ModelError> {
        if self.value != other.value || self.value_type != other.value_type {
            return Err(ModelError::ConflictingRecord(format!(
                "{}#{}",
                self.activity, self.name
            )));
        }
        Ok(())
    }
}

fn relation_label(kind: &str, key: &RelationKey) -> String {
    match &key.2 {
        Some(role) => format!("{kind}({}, {}, {role})", key.0, key.1),
        None => format!("{kind}({}, {})", key.0, key.1),
    }
}

impl MergeRecord for Used {
    fn merge_from(&mut self, other: &Self) -> Result<(), ModelError> {
        let label = relation_label("used", &self.key());
        match (self.time, other.time) {
            (Some(a), Some(b)) if a != b => Err(ModelError::ConflictingRecord(label)),
            (None, Some(b)) => {
                self.time = Some(b);
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl MergeRecord for WasGeneratedBy {
    fn merge_from(&mut self, other: &Self) -> Result<(), ModelError> {
        let label = relation_label("wasGeneratedBy", &self.key());
        match (self.time, other.time) {
            (Some(a), Some(b)) if a != b => Err(ModelError::ConflictingRecord(label)),
            (None, Some(b)) => {
                self.time = Some(b);
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl MergeRecord for WasAssociatedWith {
    fn merge_from(&mut self, _other: &Self) -> Result<(), ModelError> {
        Ok(())
    }
}

impl MergeRecord for WasAttributedTo {
    fn merge_from(&mut self, _other: &Self) -> Result<(), ModelError> {
        Ok(())
    }
}

/// Inserts `value` under `key`, merging field-wise with any existing value.
pub(crate) fn upsert<K: Ord + Clone, V: MergeRecord + Clone>(
    map: &mut BTreeMap<K, V>,
    key: K,
    value: &V,
) -> Result<(), ModelError> {
    match map.get_mut(&key) {
        Some(existing) => {
            let mut merged = existing.clone();
            merged.merge_from(value)?;
            *existing = merged;
            Ok(())
        }
        None => {
            map.insert(key, value.clone());
            Ok(())
        }
    }
}

impl ProvenanceDocument {
    pub fn new(namespaces: Namespaces) -> Self {
        ProvenanceDocument {
            namespaces,
            ..Default::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.row_count() == 0 && self.incomplete_ids.is_empty()
    }

    /// Entities, activities, agents and descriptions.
    pub fn record_count(&self) -> usize {
        self.entities.len() + self.activities.len() + self.agents.len() + self.descriptions.len()
    }

    pub fn relation_count(&self) -> usize {
        self.used.len() + self.generations.len() + self.associations.len() + self.attributions.len()
    }

    /// Every stored row: records, parameters and relations.
    pub fn row_count(&self) -> usize {
        self.record_count() + self.parameters.len() + self.relation_count()
    }

    pub fn is_stub(&self, id: &QualifiedId) -> bool {
        self.incomplete_ids.contains(id)
    }

    pub fn class_of(&self, id: &QualifiedId) -> Option<RecordClass> {
        if self.entities.contains_key(id) {
            Some(RecordClass::Entity)
        } else if self.activities.contains_key(id) {
            Some(RecordClass::Activity)
        } else if self.agents.contains_key(id) {
            Some(RecordClass::Agent)
        } else if self.descriptions.contains_key(id) {
            Some(RecordClass::ActivityDescription)
        } else {
            None
        }
    }

    pub fn record(&self, id: &QualifiedId) -> Option<Record> {
        if let Some(r) = self.entities.get(id) {
            return Some(Record::Entity(r.clone()));
        }
        if let Some(r) = self.activities.get(id) {
            return Some(Record::Activity(r.clone()));
        }
        if let Some(r) = self.agents.get(id) {
            return Some(Record::Agent(r.clone()));
        }
        self.descriptions
            .get(id)
            .map(|r| Record::ActivityDescription(r.clone()))
    }

    /// All record ids, across classes, in id order.
    pub fn record_ids(&self) -> BTreeSet<QualifiedId> {
        self.entities
            .keys()
            .chain(self.activities.keys())
            .chain(self.agents.keys())
            .chain(self.descriptions.keys())
            .cloned()
            .collect()
    }

    pub fn add_entity(&mut self, entity: Entity) -> Result<(), ModelError> {
        upsert(&mut self.entities, entity.id.clone(), &entity)?;
        self.incomplete_ids.remove(&entity.id);
        Ok(())
    }

    pub fn add_activity(&mut self, activity: Activity) -> Result<(), ModelError> {
        upsert(&mut self.activities, activity.id.clone(), &activity)?;
        self.incomplete_ids.remove(&activity.id);
        Ok(())
    }

    pub fn add_agent(&mut self, agent: Agent) -> Result<(), ModelError> {
        upsert(&mut self.agents, agent.id.clone(), &agent)?;
        self.incomplete_ids.remove(&agent.id);
        Ok(())
    }

    pub fn add_description(&mut self, description: ActivityDescription) -> Result<(), ModelError> {
        upsert(&mut self.descriptions, description.id.clone(), &description)?;
        self.incomplete_ids.remove(&description.id);
        Ok(())
    }

    pub fn add_parameter(&mut self, parameter: Parameter) -> Result<(), ModelError> {
        upsert(&mut self.parameters, parameter.key(), &parameter)
    }

    pub fn add_used(&mut self, used: Used) -> Result<(), ModelError> {
        upsert(&mut self.used, used.key(), &used)
    }

    pub fn add_generation(&mut self, generation: WasGeneratedBy) -> Result<(), ModelError> {
        upsert(&mut self.generations, generation.key(), &generation)
    }

    pub fn add_association(&mut self, association: WasAssociatedWith) -> Result<(), ModelError> {
        upsert(&mut self.associations, association.key(), &association)
    }

    pub fn add_attribution(&mut self, attribution: WasAttributedTo) -> Result<(), ModelError> {
        upsert(&mut self.attributions, attribution.key(), &attribution)
    }

    /// Declares a stub entity unless a record with this id already exists.
    pub fn ensure_entity_stub(&mut self, id: &QualifiedId) {
        if self.class_of(id).is_none() {
            self.entities.insert(id.clone(), Entity::new(id.clone()));
            self.incomplete_ids.insert(id.clone());
        }
    }

    pub fn ensure_activity_stub(&mut self, id: &QualifiedId) {
        if self.class_of(id).is_none() {
            self.activities.insert(id.clone(), Activity::new(id.clone()));
            self.incomplete_ids.insert(id.clone());
        }
    }

    pub fn ensure_agent_stub(&mut self, id: &QualifiedId) {
        if self.class_of(id).is_none() {
            self.agents.insert(id.clone(), Agent::stub(id.clone()));
            self.incomplete_ids.insert(id.clone());
        }
    }

    /// The activity generating `entity`, when there is exactly one.
    pub fn generator_of(&self, entity: &QualifiedId) -> Option<&QualifiedId> {
        let mut found = self
            .generations
            .values()
            .filter(|g| &g.entity == entity)
            .map(|g| &g.activity);
        let first = found.next()?;
        if found.all(|other| other == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn parameters_of<'a>(&'a self, activity: &'a QualifiedId) -> impl Iterator<Item = &'a Parameter> + 'a {
        self.parameters
            .range((activity.clone(), String::new())..)
            .take_while(move |((a, _), _)| a == activity)
            .map(|(_, p)| p)
    }
}
