use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::records::{Attributes, RecordClass};
use super::vocab;
use super::{ProvenanceDocument, QualifiedId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FindingCode {
    /// Referenced id without a declared record, or a declared stub.
    DanglingRef,
    Cycle,
    MultiGeneration,
    /// The same id is used by records of two classes.
    DuplicateId,
    /// A relation endpoint points at a record of the wrong class.
    ClassMismatch,
    UnknownPrefix,
    MissingNamespace,
    EmptyName,
    TimeOrder,
    BadParameterValue,
    StubWithoutRecord,
    ReservedAttribute,
}

impl FindingCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FindingCode::DanglingRef => "DANGLING_REF",
            FindingCode::Cycle => "CYCLE",
            FindingCode::MultiGeneration => "MULTI_GENERATION",
            FindingCode::DuplicateId => "DUPLICATE_ID",
            FindingCode::ClassMismatch => "CLASS_MISMATCH",
            FindingCode::UnknownPrefix => "UNKNOWN_PREFIX",
            FindingCode::MissingNamespace => "MISSING_NAMESPACE",
            FindingCode::EmptyName => "EMPTY_NAME",
            FindingCode::TimeOrder => "TIME_ORDER",
            FindingCode::BadParameterValue => "BAD_PARAMETER_VALUE",
            FindingCode::StubWithoutRecord => "STUB_WITHOUT_RECORD",
            FindingCode::ReservedAttribute => "RESERVED_ATTRIBUTE",
        }
    }

    pub fn severity(&self) -> Severity {
        match self {
            FindingCode::DanglingRef => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Finding {
    pub severity: Severity,
    pub code: FindingCode,
    /// Rendered id of the record the finding is about; a prefix for
    /// namespace findings.
    pub subject: String,
}

impl Finding {
    fn new(code: FindingCode, subject: impl fmt::Display) -> Self {
        Finding {
            severity: code.severity(),
            code,
            subject: subject.to_string(),
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} {} at {}", self.code.as_str(), self.subject)
    }
}

/// Sorted, de-duplicated findings: errors first, then by code and subject.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }
}

struct Checker<'a> {
    doc: &'a ProvenanceDocument,
    findings: BTreeSet<Finding>,
}

impl Checker<'_> {
    fn push(&mut self, code: FindingCode, subject: impl fmt::Display) {
        self.findings.insert(Finding::new(code, subject));
    }

    fn check_id(&mut self, id: &QualifiedId) {
        if !self.doc.namespaces.contains(id.prefix()) {
            self.push(FindingCode::UnknownPrefix, id);
        }
    }

    /// Endpoint of a relation, parameter or description reference.
    fn check_ref(&mut self, id: &QualifiedId, expected: RecordClass) {
        self.check_id(id);
        match self.doc.class_of(id) {
            None => self.push(FindingCode::DanglingRef, id),
            Some(class) if class != expected => self.push(FindingCode::ClassMismatch, id),
            Some(_) => {}
        }
    }

    fn check_attributes(&mut self, id: &QualifiedId, attributes: &Attributes, reserved: &[&str]) {
        if attributes.keys().any(|k| reserved.contains(&k.as_str())) {
            self.push(FindingCode::ReservedAttribute, id);
        }
    }

    fn check_namespaces(&mut self) {
        let ns = &self.doc.namespaces;
        for required in [super::id::PROV_PREFIX, ns.default_prefix()] {
            if !ns.contains(required) {
                self.push(FindingCode::MissingNamespace, required);
            }
        }
    }

    fn check_records(&mut self) {
        let doc = self.doc;
        let mut seen: BTreeMap<&QualifiedId, usize> = BTreeMap::new();
        for id in doc
            .entities
            .keys()
            .chain(doc.activities.keys())
            .chain(doc.agents.keys())
            .chain(doc.descriptions.keys())
        {
            *seen.entry(id).or_default() += 1;
            self.check_id(id);
        }
        for (id, count) in seen {
            if count > 1 {
                self.push(FindingCode::DuplicateId, id);
            }
        }
        for stub in &doc.incomplete_ids {
            if doc.class_of(stub).is_some() {
                self.push(FindingCode::DanglingRef, stub);
            } else {
                self.push(FindingCode::StubWithoutRecord, stub);
            }
        }
        for e in doc.entities.values() {
            self.check_attributes(&e.id, &e.attributes, vocab::ENTITY_RESERVED);
        }
        for a in doc.activities.values() {
            if let (Some(start), Some(end)) = (a.start_time, a.end_time) {
                if start > end {
                    self.push(FindingCode::TimeOrder, &a.id);
                }
            }
            if let Some(desc) = &a.description_ref {
                self.check_ref(desc, RecordClass::ActivityDescription);
            }
            self.check_attributes(&a.id, &a.attributes, vocab::ACTIVITY_RESERVED);
        }
        for ag in doc.agents.values() {
            if ag.name.is_empty() && !doc.is_stub(&ag.id) {
                self.push(FindingCode::EmptyName, &ag.id);
            }
            self.check_attributes(&ag.id, &ag.attributes, vocab::AGENT_RESERVED);
        }
        for d in doc.descriptions.values() {
            if d.name.is_empty() && !doc.is_stub(&d.id) {
                self.push(FindingCode::EmptyName, &d.id);
            }
        }
        for p in doc.parameters.values() {
            self.check_ref(&p.activity, RecordClass::Activity);
            if !p.value_type.accepts(&p.value) {
                self.push(FindingCode::BadParameterValue, format!("{}#{}", p.activity, p.name));
            }
        }
    }

    fn check_relations(&mut self) {
        let doc = self.doc;
        for u in doc.used.values() {
            self.check_ref(&u.activity, RecordClass::Activity);
            self.check_ref(&u.entity, RecordClass::Entity);
        }
        let mut generated: BTreeMap<&QualifiedId, usize> = BTreeMap::new();
        for g in doc.generations.values() {
            self.check_ref(&g.entity, RecordClass::Entity);
            self.check_ref(&g.activity, RecordClass::Activity);
            *generated.entry(&g.entity).or_default() += 1;
        }
        for (entity, count) in generated {
            if count > 1 {
                self.push(FindingCode::MultiGeneration, entity);
            }
        }
        for a in doc.associations.values() {
            self.check_ref(&a.activity, RecordClass::Activity);
            self.check_ref(&a.agent, RecordClass::Agent);
        }
        for a in doc.attributions.values() {
            self.check_ref(&a.entity, RecordClass::Entity);
            self.check_ref(&a.agent, RecordClass::Agent);
        }
    }

    fn check_cycles(&mut self) {
        for component in cyclic_components(self.doc) {
            if let Some(smallest) = component.activities.first() {
                self.push(FindingCode::Cycle, smallest);
            }
        }
    }
}

/// For each strongly connected component of the entity/activity derivation
/// graph that contains a cycle, the smallest activity id in it.
/// A strongly connected component of the derivation graph containing a
/// cycle.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct CyclicComponent {
    pub entities: BTreeSet<QualifiedId>,
    pub activities: BTreeSet<QualifiedId>,
}

/// Arcs: entity -> generating activity, activity -> used entity. Entity and
/// activity ids are kept as distinct nodes even when they collide.
pub(crate) fn cyclic_components(doc: &ProvenanceDocument) -> Vec<CyclicComponent> {
    let mut graph: DiGraph<(bool, &QualifiedId), ()> = DiGraph::new();
    let mut entity_nodes: BTreeMap<&QualifiedId, NodeIndex> = BTreeMap::new();
    let mut activity_nodes: BTreeMap<&QualifiedId, NodeIndex> = BTreeMap::new();
    for g in doc.generations.values() {
        let e = *entity_nodes
            .entry(&g.entity)
            .or_insert_with(|| graph.add_node((false, &g.entity)));
        let a = *activity_nodes
            .entry(&g.activity)
            .or_insert_with(|| graph.add_node((true, &g.activity)));
        graph.add_edge(e, a, ());
    }
    for u in doc.used.values() {
        let a = *activity_nodes
            .entry(&u.activity)
            .or_insert_with(|| graph.add_node((true, &u.activity)));
        let e = *entity_nodes
            .entry(&u.entity)
            .or_insert_with(|| graph.add_node((false, &u.entity)));
        graph.add_edge(a, e, ());
    }
    let mut out: Vec<CyclicComponent> = tarjan_scc(&graph)
        .into_iter()
        .filter(|c| c.len() >= 2)
        .map(|c| {
            let mut comp = CyclicComponent::default();
            for n in c {
                let (is_activity, id) = graph[n];
                if is_activity {
                    comp.activities.insert(id.clone());
                } else {
                    comp.entities.insert(id.clone());
                }
            }
            comp
        })
        .collect();
    out.sort_by(|a, b| a.activities.first().cmp(&b.activities.first()));
    out
}

/// Checks every document invariant. Referenced-but-undeclared ids and stubs
/// are reported as `DANGLING_REF` warnings; everything else is an error.
pub fn validate_document(doc: &ProvenanceDocument) -> ValidationReport {
    let mut checker = Checker {
        doc,
        findings: BTreeSet::new(),
    };
    checker.check_namespaces();
    checker.check_records();
    checker.check_relations();
    checker.check_cycles();
    ValidationReport {
        findings: checker.findings.into_iter().collect(),
    }
}
