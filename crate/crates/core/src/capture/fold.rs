use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::event::{CaptureEvent, EventPayload};
use crate::model::{
    cyclic_components, Activity, ActivityDescription, Agent, Attributes, CodeReference, Entity,
    ModelError, Namespaces, Parameter, ProvenanceDocument, QualifiedId, Used, WasAssociatedWith,
    WasAttributedTo, WasGeneratedBy,
};

/// Non-fatal problems found while folding an event stream.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FoldWarning {
    EndWithoutStart(QualifiedId),
    UnclosedActivity(QualifiedId),
    EventBeforeStart(QualifiedId),
    EventAfterEnd(QualifiedId),
    DuplicateStart(QualifiedId),
    /// Two events disagree about a record; the first value is kept.
    ConflictingDeclaration(String),
    /// An entity was generated by more than one activity; only the
    /// generation with the smallest `(activity, role)` is kept.
    MultiGeneration(QualifiedId),
    /// Usages closing a derivation cycle were dropped; the id is the smallest
    /// activity of the cycle.
    CycleBroken(QualifiedId),
}

impl FoldWarning {
    pub fn code(&self) -> &'static str {
        match self {
            FoldWarning::EndWithoutStart(_) => "END_WITHOUT_START",
            FoldWarning::UnclosedActivity(_) => "UNCLOSED_ACTIVITY",
            FoldWarning::EventBeforeStart(_) => "EVENT_BEFORE_START",
            FoldWarning::EventAfterEnd(_) => "EVENT_AFTER_END",
            FoldWarning::DuplicateStart(_) => "DUPLICATE_START",
            FoldWarning::ConflictingDeclaration(_) => "CONFLICTING_DECLARATION",
            FoldWarning::MultiGeneration(_) => "MULTI_GENERATION",
            FoldWarning::CycleBroken(_) => "CYCLE_BROKEN",
        }
    }
}

impl fmt::Display for FoldWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let subject = match self {
            FoldWarning::EndWithoutStart(id)
            | FoldWarning::UnclosedActivity(id)
            | FoldWarning::EventBeforeStart(id)
            | FoldWarning::EventAfterEnd(id)
            | FoldWarning::DuplicateStart(id)
            | FoldWarning::MultiGeneration(id)
            | FoldWarning::CycleBroken(id) => id.to_string(),
            FoldWarning::ConflictingDeclaration(what) => what.clone(),
        };
        write!(f, "{}({subject})", self.code())
    }
}

struct Folder {
    doc: ProvenanceDocument,
    started: BTreeSet<QualifiedId>,
    ended: BTreeSet<QualifiedId>,
    warnings: BTreeSet<FoldWarning>,
}

impl Folder {
    fn note(&mut self, result: Result<(), ModelError>) {
        if let Err(e) = result {
            let what = match e {
                ModelError::ConflictingRecord(what) => what,
                other => other.to_string(),
            };
            self.warnings.insert(FoldWarning::ConflictingDeclaration(what));
        }
    }

    /// Activity referenced by a used/generated/parameter/association event.
    fn touch_activity(&mut self, id: &QualifiedId) {
        if !self.started.contains(id) {
            self.warnings.insert(FoldWarning::EventBeforeStart(id.clone()));
            self.doc.ensure_activity_stub(id);
        } else if self.ended.contains(id) {
            self.warnings.insert(FoldWarning::EventAfterEnd(id.clone()));
        }
    }

    /// Adds unknown event keys to the attributes of an activity or entity.
    fn extend_attributes(&mut self, id: &QualifiedId, extra: &Attributes) {
        let target = if let Some(a) = self.doc.activities.get_mut(id) {
            &mut a.attributes
        } else if let Some(e) = self.doc.entities.get_mut(id) {
            &mut e.attributes
        } else {
            return;
        };
        let mut conflict = false;
        for (key, value) in extra {
            match target.get(key) {
                Some(existing) if existing != value => conflict = true,
                Some(_) => {}
                None => {
                    target.insert(key.clone(), value.clone());
                }
            }
        }
        if conflict {
            self.warnings
                .insert(FoldWarning::ConflictingDeclaration(id.to_string()));
        }
    }

    fn apply(&mut self, event: &CaptureEvent) {
        let extra = &event.extra;
        match &event.payload {
            EventPayload::ActivityStart {
                activity_id,
                name,
                time,
                description_ref,
            } => {
                if !self.started.insert(activity_id.clone()) {
                    self.warnings.insert(FoldWarning::DuplicateStart(activity_id.clone()));
                }
                let mut activity = Activity::named(activity_id.clone(), name);
                activity.start_time = Some(*time);
                activity.description_ref = description_ref.clone();
                activity.attributes = extra.clone();
                let result = self.doc.add_activity(activity);
                self.note(result);
            }
            EventPayload::ActivityEnd { activity_id, time } => {
                if !self.started.contains(activity_id) {
                    self.warnings.insert(FoldWarning::EndWithoutStart(activity_id.clone()));
                    self.doc.ensure_activity_stub(activity_id);
                }
                self.ended.insert(activity_id.clone());
                let mut patch = Activity::new(activity_id.clone());
                patch.end_time = Some(*time);
                patch.attributes = extra.clone();
                let result = self.patch_activity(patch);
                self.note(result);
            }
            EventPayload::Used {
                activity_id,
                entity_id,
                role,
                time,
            } => {
                self.touch_activity(activity_id);
                self.doc.ensure_entity_stub(entity_id);
                let result = self.doc.add_used(Used {
                    activity: activity_id.clone(),
                    entity: entity_id.clone(),
                    role: role.clone(),
                    time: *time,
                });
                self.note(result);
                self.extend_attributes(activity_id, extra);
            }
            EventPayload::Generated {
                activity_id,
                entity_id,
                role,
                time,
            } => {
                self.touch_activity(activity_id);
                self.doc.ensure_entity_stub(entity_id);
                let result = self.doc.add_generation(WasGeneratedBy {
                    entity: entity_id.clone(),
                    activity: activity_id.clone(),
                    role: role.clone(),
                    time: *time,
                });
                self.note(result);
                self.extend_attributes(activity_id, extra);
            }
            EventPayload::Entity {
                entity_id,
                name,
                location,
            } => {
                let mut entity = Entity::new(entity_id.clone());
                entity.name = name.clone();
                entity.location = location.clone();
                entity.attributes = extra.clone();
                let result = self.doc.add_entity(entity);
                self.note(result);
            }
            EventPayload::Agent {
                agent_id,
                name,
                kind,
                email,
            } => {
                let mut agent = Agent::new(agent_id.clone(), name, *kind);
                agent.email = email.clone();
                agent.attributes = extra.clone();
                let result = self.doc.add_agent(agent);
                self.note(result);
            }
            EventPayload::Association {
                activity_id,
                agent_id,
                role,
            } => {
                self.touch_activity(activity_id);
                self.doc.ensure_agent_stub(agent_id);
                let result = self.doc.add_association(WasAssociatedWith {
                    activity: activity_id.clone(),
                    agent: agent_id.clone(),
                    role: role.clone(),
                });
                self.note(result);
                self.extend_attributes(activity_id, extra);
            }
            EventPayload::Attribution {
                entity_id,
                agent_id,
                role,
            } => {
                self.doc.ensure_entity_stub(entity_id);
                self.doc.ensure_agent_stub(agent_id);
                let result = self.doc.add_attribution(WasAttributedTo {
                    entity: entity_id.clone(),
                    agent: agent_id.clone(),
                    role: role.clone(),
                });
                self.note(result);
                self.extend_attributes(entity_id, extra);
            }
            EventPayload::Parameter {
                activity_id,
                name,
                value,
                value_type,
            } => {
                self.touch_activity(activity_id);
                let result = self
                    .doc
                    .add_parameter(Parameter::new(activity_id.clone(), name, value, *value_type));
                self.note(result);
                self.extend_attributes(activity_id, extra);
            }
            EventPayload::Description {
                description_id,
                name,
                version,
                doc,
                docurl,
                code_ref,
                code_revision,
            } => {
                let mut description = ActivityDescription::new(description_id.clone(), name);
                description.version = version.clone();
                description.doc = doc.clone();
                description.docurl = docurl.clone();
                description.code_reference = code_ref.as_ref().map(|uri| CodeReference {
                    uri: uri.clone(),
                    revision: code_revision.clone(),
                });
                let result = self.doc.add_description(description);
                self.note(result);
            }
        }
    }

    /// Merges fields into an existing activity without clearing its stub
    /// flag.
    fn patch_activity(&mut self, patch: Activity) -> Result<(), ModelError> {
        let target = self
            .doc
            .activities
            .get_mut(&patch.id)
            .expect("activity exists before it is patched");
        let mut merged = target.clone();
        crate::model::MergeRecord::merge_from(&mut merged, &patch)?;
        *target = merged;
        Ok(())
    }

    fn resolve_multi_generation(&mut self) {
        let mut by_entity: BTreeMap<QualifiedId, Vec<_>> = BTreeMap::new();
        for key in self.doc.generations.keys() {
            by_entity.entry(key.0.clone()).or_default().push(key.clone());
        }
        for (entity, keys) in by_entity {
            if keys.len() < 2 {
                continue;
            }
            // keys are already in (entity, activity, role) order
            for key in &keys[1..] {
                self.doc.generations.remove(key);
            }
            self.warnings.insert(FoldWarning::MultiGeneration(entity));
        }
    }

    fn break_cycles(&mut self) {
        for component in cyclic_components(&self.doc) {
            self.doc.used.retain(|(activity, entity, _), _| {
                !(component.activities.contains(activity) && component.entities.contains(entity))
            });
            if let Some(smallest) = component.activities.first() {
                self.warnings.insert(FoldWarning::CycleBroken(smallest.clone()));
            }
        }
    }
}

/// Builds a document from a capture event stream.
///
/// Never fails: events referring to undeclared activities, entities or
/// agents create stubs, and inconsistencies are reported as warnings. The
/// result carries no validation errors; its only possible findings are
/// `DANGLING_REF` warnings for stubs and undeclared description references.
pub fn fold_events(events: &[CaptureEvent], namespaces: &Namespaces) -> (ProvenanceDocument, Vec<FoldWarning>) {
    let mut folder = Folder {
        doc: ProvenanceDocument::new(namespaces.clone()),
        started: BTreeSet::new(),
        ended: BTreeSet::new(),
        warnings: BTreeSet::new(),
    };
    for event in events {
        folder.apply(event);
    }
    let unclosed: Vec<_> = folder.started.difference(&folder.ended).cloned().collect();
    for id in unclosed {
        folder.warnings.insert(FoldWarning::UnclosedActivity(id));
    }
    folder.resolve_multi_generation();
    folder.break_cycles();
    (folder.doc, folder.warnings.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capture::parse_event_line;
    use crate::model::{validate_document, FindingCode, Timestamp};

    fn id(s: &str) -> QualifiedId {
        QualifiedId::from_rendered(s).unwrap()
    }

    fn events(lines: &[&str]) -> Vec<CaptureEvent> {
        lines
            .iter()
            .map(|l| parse_event_line(l, &Namespaces::default()).unwrap())
            .collect()
    }

    #[test]
    fn simple_activity() {
        let evs = events(&[
            r#"{"event":"activity_start","activity_id":"ex:a1","name":"calibrate","time":"2021-01-01T00:00:00Z"}"#,
            r#"{"event":"used","activity_id":"ex:a1","entity_id":"ex:raw"}"#,
            r#"{"event":"generated","activity_id":"ex:a1","entity_id":"ex:lvl1"}"#,
            r#"{"event":"activity_end","activity_id":"ex:a1","time":"2021-01-01T00:05:00Z"}"#,
        ]);
        let (doc, warnings) = fold_events(&evs, &Namespaces::default());
        assert!(warnings.is_empty());

        let mut expected = ProvenanceDocument::default();
        let mut a1 = Activity::named(id("ex:a1"), "calibrate");
        a1.start_time = Some(Timestamp::parse("2021-01-01T00:00:00Z").unwrap());
        a1.end_time = Some(Timestamp::parse("2021-01-01T00:05:00Z").unwrap());
        expected.add_activity(a1).unwrap();
        expected.ensure_entity_stub(&id("ex:raw"));
        expected.ensure_entity_stub(&id("ex:lvl1"));
        expected.add_used(Used::new(id("ex:a1"), id("ex:raw"))).unwrap();
        expected.add_generation(WasGeneratedBy::new(id("ex:lvl1"), id("ex:a1"))).unwrap();
        assert_eq!(doc, expected);
        assert_eq!(doc.activities.len(), 1);
        assert_eq!(doc.entities.len(), 2);

        let report = validate_document(&doc);
        assert!(report.findings.iter().all(|f| f.code == FindingCode::DanglingRef));
    }

    #[test]
    fn empty_stream() {
        let (doc, warnings) = fold_events(&[], &Namespaces::default());
        assert!(doc.is_empty());
        assert!(warnings.is_empty());
    }

    #[test]
    fn event_before_start_creates_stub() {
        let evs = events(&[r#"{"event":"used","activity_id":"ex:a1","entity_id":"ex:raw"}"#]);
        let (doc, warnings) = fold_events(&evs, &Namespaces::default());
        assert_eq!(warnings, vec![FoldWarning::EventBeforeStart(id("ex:a1"))]);
        assert!(doc.is_stub(&id("ex:a1")));
        assert!(doc.activities.contains_key(&id("ex:a1")));
    }

    #[test]
    fn end_without_start_and_unclosed() {
        let evs = events(&[
            r#"{"event":"activity_end","activity_id":"ex:a1","time":"2021-01-01T00:05:00Z"}"#,
            r#"{"event":"activity_start","activity_id":"ex:a2","name":"x","time":"2021-01-01T00:00:00Z"}"#,
        ]);
        let (doc, warnings) = fold_events(&evs, &Namespaces::default());
        assert_eq!(
            warnings,
            vec![
                FoldWarning::EndWithoutStart(id("ex:a1")),
                FoldWarning::UnclosedActivity(id("ex:a2"))
            ]
        );
        assert!(doc.is_stub(&id("ex:a1")));
        assert!(doc.activities[&id("ex:a1")].end_time.is_some());
    }

    #[test]
    fn late_start_fills_stub() {
        let evs = events(&[
            r#"{"event":"used","activity_id":"ex:a1","entity_id":"ex:raw"}"#,
            r#"{"event":"activity_start","activity_id":"ex:a1","name":"x","time":"2021-01-01T00:00:00Z"}"#,
            r#"{"event":"activity_end","activity_id":"ex:a1","time":"2021-01-01T00:05:00Z"}"#,
        ]);
        let (doc, warnings) = fold_events(&evs, &Namespaces::default());
        assert_eq!(warnings, vec![FoldWarning::EventBeforeStart(id("ex:a1"))]);
        assert!(!doc.is_stub(&id("ex:a1")));
        assert_eq!(doc.activities[&id("ex:a1")].name.as_deref(), Some("x"));
    }

    #[test]
    fn contradictions_are_repaired() {
        let evs = events(&[
            r#"{"event":"activity_start","activity_id":"ex:a1","name":"x","time":"2021-01-01T00:00:00Z"}"#,
            r#"{"event":"activity_start","activity_id":"ex:a2","name":"y","time":"2021-01-01T00:00:00Z"}"#,
            r#"{"event":"generated","activity_id":"ex:a2","entity_id":"ex:e1"}"#,
            r#"{"event":"generated","activity_id":"ex:a1","entity_id":"ex:e1"}"#,
            r#"{"event":"used","activity_id":"ex:a1","entity_id":"ex:e1"}"#,
            r#"{"event":"entity","entity_id":"ex:e1","name":"one"}"#,
            r#"{"event":"entity","entity_id":"ex:e1","name":"two"}"#,
            r#"{"event":"activity_end","activity_id":"ex:a1","time":"2021-01-01T00:05:00Z"}"#,
            r#"{"event":"activity_end","activity_id":"ex:a2","time":"2021-01-01T00:05:00Z"}"#,
        ]);
        let (doc, warnings) = fold_events(&evs, &Namespaces::default());
        assert_eq!(
            warnings,
            vec![
                FoldWarning::ConflictingDeclaration("ex:e1".into()),
                FoldWarning::MultiGeneration(id("ex:e1")),
                FoldWarning::CycleBroken(id("ex:a1")),
            ]
        );
        assert_eq!(doc.generations.len(), 1);
        assert!(doc.used.is_empty());
        assert_eq!(doc.entities[&id("ex:e1")].name.as_deref(), Some("one"));
        assert!(!validate_document(&doc).has_errors());
    }

    #[test]
    fn extra_keys_land_in_attributes() {
        let evs = events(&[
            r#"{"event":"activity_start","activity_id":"ex:a1","name":"x","time":"2021-01-01T00:00:00Z","host":"node7"}"#,
            r#"{"event":"used","activity_id":"ex:a1","entity_id":"ex:raw","checksum":"abc"}"#,
            r#"{"event":"entity","entity_id":"ex:raw","telescope":"LST-1"}"#,
            r#"{"event":"activity_end","activity_id":"ex:a1","time":"2021-01-01T00:05:00Z"}"#,
        ]);
        let (doc, warnings) = fold_events(&evs, &Namespaces::default());
        assert!(warnings.is_empty());
        let a1 = &doc.activities[&id("ex:a1")];
        assert_eq!(a1.attributes["host"], "node7");
        assert_eq!(a1.attributes["checksum"], "abc");
        assert_eq!(doc.entities[&id("ex:raw")].attributes["telescope"], "LST-1");
        assert!(!doc.is_stub(&id("ex:raw")));
    }
}
