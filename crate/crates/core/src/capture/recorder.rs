use std::collections::BTreeSet;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use rand::Rng;

use super::event::{CaptureEvent, EventPayload};
use super::CaptureError;
use crate::model::{
    ActivityDescription, Agent, Entity, Namespaces, QualifiedId, Timestamp, ValueType,
};

/// Handle on an activity opened by [`RecorderSession::begin_activity`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ActivityHandle {
    id: QualifiedId,
}

impl ActivityHandle {
    pub fn id(&self) -> &QualifiedId {
        &self.id
    }
}

type Clock = Box<dyn FnMut() -> Timestamp + Send>;

/// Records pipeline events as JSON lines on an append-only sink.
///
/// Each call writes exactly one line and flushes the sink. A session must
/// stay on one thread; run one session per sink for concurrent pipelines.
pub struct RecorderSession<W: Write> {
    sink: W,
    namespaces: Namespaces,
    token: String,
    counter: u64,
    open: BTreeSet<QualifiedId>,
    closed: BTreeSet<QualifiedId>,
    clock: Clock,
}

impl RecorderSession<std::fs::File> {
    /// Opens (or creates) a capture log in append mode.
    pub fn append_to(path: &Path, namespaces: Namespaces) -> Result<Self, CaptureError> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(RecorderSession::new(file, namespaces))
    }
}

impl<W: Write> RecorderSession<W> {
    /// New session with a random 8-hex-digit token and the system clock.
    pub fn new(sink: W, namespaces: Namespaces) -> Self {
        let token = format!("{:08x}", rand::thread_rng().gen::<u32>());
        RecorderSession {
            sink,
            namespaces,
            token,
            counter: 0,
            open: BTreeSet::new(),
            closed: BTreeSet::new(),
            clock: Box::new(Timestamp::now),
        }
    }

    /// Replaces the session token used in generated activity ids.
    pub fn with_token(mut self, token: &str) -> Self {
        self.token = sanitize(token);
        self
    }

    pub fn with_clock(mut self, clock: impl FnMut() -> Timestamp + Send + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    pub fn token(&self) -> &str {
        &self.token
    }

    pub fn namespaces(&self) -> &Namespaces {
        &self.namespaces
    }

    pub fn into_sink(self) -> W {
        self.sink
    }

    fn emit(&mut self, event: CaptureEvent) -> Result<(), CaptureError> {
        let mut line = event.to_line();
        line.push('\n');
        self.sink.write_all(line.as_bytes())?;
        self.sink.flush()?;
        Ok(())
    }

    fn check_open(&self, handle: &ActivityHandle) -> Result<(), CaptureError> {
        if self.open.contains(&handle.id) {
            Ok(())
        } else if self.closed.contains(&handle.id) {
            Err(CaptureError::UseAfterEnd(handle.id.clone()))
        } else {
            Err(CaptureError::UnknownHandle(handle.id.clone()))
        }
    }

    fn check_prefix(&self, id: &QualifiedId) -> Result<(), CaptureError> {
        if self.namespaces.contains(id.prefix()) {
            Ok(())
        } else {
            Err(CaptureError::InvalidArgument(format!("unknown prefix in {id}")))
        }
    }

    /// Starts an activity with a fresh id
    /// `<default-prefix>:<name>_<counter>_<token>`.
    pub fn begin_activity(
        &mut self,
        name: &str,
        description_ref: Option<&QualifiedId>,
    ) -> Result<ActivityHandle, CaptureError> {
        if name.is_empty() {
            return Err(CaptureError::InvalidArgument("activity name is empty".into()));
        }
        if let Some(d) = description_ref {
            self.check_prefix(d)?;
        }
        let local = format!("{}_{}_{}", sanitize(name), self.counter + 1, self.token);
        let id = QualifiedId::new(self.namespaces.default_prefix(), local)
            .map_err(|e| CaptureError::InvalidArgument(e.to_string()))?;
        let time = (self.clock)();
        self.emit(
            EventPayload::ActivityStart {
                activity_id: id.clone(),
                name: name.to_owned(),
                time,
                description_ref: description_ref.cloned(),
            }
            .into(),
        )?;
        self.counter += 1;
        self.open.insert(id.clone());
        Ok(ActivityHandle { id })
    }

    pub fn record_used(
        &mut self,
        handle: &ActivityHandle,
        entity_id: &QualifiedId,
        role: Option<&str>,
    ) -> Result<(), CaptureError> {
        self.check_open(handle)?;
        self.check_prefix(entity_id)?;
        let time = (self.clock)();
        self.emit(
            EventPayload::Used {
                activity_id: handle.id.clone(),
                entity_id: entity_id.clone(),
                role: role.map(str::to_owned),
                time: Some(time),
            }
            .into(),
        )
    }

    pub fn record_generated(
        &mut self,
        handle: &ActivityHandle,
        entity_id: &QualifiedId,
        role: Option<&str>,
    ) -> Result<(), CaptureError> {
        self.check_open(handle)?;
        self.check_prefix(entity_id)?;
        let time = (self.clock)();
        self.emit(
            EventPayload::Generated {
                activity_id: handle.id.clone(),
                entity_id: entity_id.clone(),
                role: role.map(str::to_owned),
                time: Some(time),
            }
            .into(),
        )
    }

    pub fn set_parameter(
        &mut self,
        handle: &ActivityHandle,
        name: &str,
        value: &str,
        value_type: ValueType,
    ) -> Result<(), CaptureError> {
        self.check_open(handle)?;
        if !value_type.accepts(value) {
            return Err(CaptureError::InvalidArgument(format!(
                "{value:?} is not a valid {}",
                value_type.as_str()
            )));
        }
        self.emit(
            EventPayload::Parameter {
                activity_id: handle.id.clone(),
                name: name.to_owned(),
                value: value.to_owned(),
                value_type,
            }
            .into(),
        )
    }

    /// Declares an entity. Only `name`, `location` and `attributes` are
    /// captured.
    pub fn declare_entity(&mut self, entity: &Entity) -> Result<(), CaptureError> {
        self.check_prefix(&entity.id)?;
        if entity.generated_at.is_some() || entity.comment.is_some() {
            return Err(CaptureError::InvalidArgument(
                "generated_at and comment cannot be captured on entity events".into(),
            ));
        }
        self.emit(CaptureEvent {
            payload: EventPayload::Entity {
                entity_id: entity.id.clone(),
                name: entity.name.clone(),
                location: entity.location.clone(),
            },
            extra: entity.attributes.clone(),
        })
    }

    pub fn declare_agent(&mut self, agent: &Agent) -> Result<(), CaptureError> {
        self.check_prefix(&agent.id)?;
        let kind = agent
            .kind
            .ok_or_else(|| CaptureError::InvalidArgument(format!("agent {} has no kind", agent.id)))?;
        if agent.name.is_empty() {
            return Err(CaptureError::InvalidArgument(format!("agent {} has no name", agent.id)));
        }
        self.emit(CaptureEvent {
            payload: EventPayload::Agent {
                agent_id: agent.id.clone(),
                name: agent.name.clone(),
                kind,
                email: agent.email.clone(),
            },
            extra: agent.attributes.clone(),
        })
    }

    pub fn declare_description(&mut self, description: &ActivityDescription) -> Result<(), CaptureError> {
        self.check_prefix(&description.id)?;
        if description.name.is_empty() {
            return Err(CaptureError::InvalidArgument("description name is empty".into()));
        }
        self.emit(
            EventPayload::Description {
                description_id: description.id.clone(),
                name: description.name.clone(),
                version: description.version.clone(),
                doc: description.doc.clone(),
                docurl: description.docurl.clone(),
                code_ref: description.code_reference.as_ref().map(|c| c.uri.clone()),
                code_revision: description.code_reference.as_ref().and_then(|c| c.revision.clone()),
            }
            .into(),
        )
    }

    pub fn associate(
        &mut self,
        handle: &ActivityHandle,
        agent_id: &QualifiedId,
        role: Option<&str>,
    ) -> Result<(), CaptureError> {
        self.check_open(handle)?;
        self.check_prefix(agent_id)?;
        self.emit(
            EventPayload::Association {
                activity_id: handle.id.clone(),
                agent_id: agent_id.clone(),
                role: role.map(str::to_owned),
            }
            .into(),
        )
    }

    pub fn attribute(
        &mut self,
        entity_id: &QualifiedId,
        agent_id: &QualifiedId,
        role: Option<&str>,
    ) -> Result<(), CaptureError> {
        self.check_prefix(entity_id)?;
        self.check_prefix(agent_id)?;
        self.emit(
            EventPayload::Attribution {
                entity_id: entity_id.clone(),
                agent_id: agent_id.clone(),
                role: role.map(str::to_owned),
            }
            .into(),
        )
    }

    pub fn end_activity(&mut self, handle: &ActivityHandle) -> Result<(), CaptureError> {
        self.check_open(handle)?;
        let time = (self.clock)();
        self.emit(
            EventPayload::ActivityEnd {
                activity_id: handle.id.clone(),
                time,
            }
            .into(),
        )?;
        self.open.remove(&handle.id);
        self.closed.insert(handle.id.clone());
        Ok(())
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capture::{fold_events, parse_event_log};

    fn fixed_clock() -> impl FnMut() -> Timestamp + Send {
        let mut tick = 0i64;
        move || {
            tick += 1;
            Timestamp::from_datetime(chrono::DateTime::from_timestamp(1_600_000_000 + tick, 0).unwrap())
        }
    }

    #[test]
    fn begin_end_emits_two_lines() {
        let mut session = RecorderSession::new(Vec::new(), Namespaces::default())
            .with_token("t0")
            .with_clock(fixed_clock());
        let h = session.begin_activity("calibrate", None).unwrap();
        assert_eq!(h.id().to_string(), "ex:calibrate_1_t0");
        session.end_activity(&h).unwrap();
        let text = String::from_utf8(session.into_sink()).unwrap();
        let events = parse_event_log(&text, &Namespaces::default()).unwrap();
        assert_eq!(events.len(), 2);
        assert!(matches!(&events[0].payload, EventPayload::ActivityStart { activity_id, .. } if activity_id == h.id()));
        assert!(matches!(&events[1].payload, EventPayload::ActivityEnd { activity_id, .. } if activity_id == h.id()));
    }

    #[test]
    fn use_after_end() {
        let mut session = RecorderSession::new(Vec::new(), Namespaces::default());
        let h = session.begin_activity("x", None).unwrap();
        session.end_activity(&h).unwrap();
        let raw = QualifiedId::from_rendered("ex:raw").unwrap();
        assert_eq!(
            session.record_used(&h, &raw, None),
            Err(CaptureError::UseAfterEnd(h.id().clone()))
        );
        assert_eq!(session.end_activity(&h), Err(CaptureError::UseAfterEnd(h.id().clone())));
    }

    #[test]
    fn ids_unique_across_sessions() {
        let mut a = RecorderSession::new(Vec::new(), Namespaces::default());
        let mut b = RecorderSession::new(Vec::new(), Namespaces::default());
        // tokens are random; force distinct ones to make the test exact
        if a.token() == b.token() {
            b = b.with_token("other");
        }
        let ha = a.begin_activity("step", None).unwrap();
        let hb = b.begin_activity("step", None).unwrap();
        assert_ne!(ha.id(), hb.id());
    }

    #[test]
    fn one_line_per_call_and_clean_fold() {
        let ns = Namespaces::default();
        let mut session = RecorderSession::new(Vec::new(), ns.clone()).with_clock(fixed_clock());
        let raw = QualifiedId::from_rendered("ex:raw").unwrap();
        let out = QualifiedId::from_rendered("ex:out").unwrap();
        session.declare_entity(&Entity::named(raw.clone(), "raw")).unwrap();
        session.declare_entity(&Entity::named(out.clone(), "out")).unwrap();
        let h = session.begin_activity("reduce", None).unwrap();
        session.record_used(&h, &raw, Some("input")).unwrap();
        session.set_parameter(&h, "threshold", "5", ValueType::Integer).unwrap();
        session.record_generated(&h, &out, None).unwrap();
        session.end_activity(&h).unwrap();
        let text = String::from_utf8(session.into_sink()).unwrap();
        assert_eq!(text.lines().count(), 7);
        let (doc, warnings) = fold_events(&parse_event_log(&text, &ns).unwrap(), &ns);
        assert!(warnings.is_empty());
        assert!(crate::model::validate_document(&doc).is_clean());
    }

    #[test]
    fn rejects_bad_arguments() {
        let mut session = RecorderSession::new(Vec::new(), Namespaces::default());
        let h = session.begin_activity("x", None).unwrap();
        assert!(session.set_parameter(&h, "n", "many", ValueType::Integer).is_err());
        let zz = QualifiedId::new("zz", "e").unwrap();
        assert!(session.record_used(&h, &zz, None).is_err());
        assert!(session.begin_activity("", None).is_err());
        let stranger = ActivityHandle {
            id: QualifiedId::from_rendered("ex:other").unwrap(),
        };
        assert!(matches!(session.end_activity(&stranger), Err(CaptureError::UnknownHandle(_))));
    }
}
