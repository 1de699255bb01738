use std::collections::BTreeSet;

use super::document::upsert;
use super::{ModelError, ProvenanceDocument, QualifiedId};

/// Union of two documents keyed by id.
///
/// Records with the same id merge field by field: an empty field takes the
/// other side's value, two different non-empty values are a conflict. A stub
/// on one side therefore merges silently into a full record on the other,
/// and the id leaves `incomplete_ids`.
pub fn merge_documents(a: &ProvenanceDocument, b: &ProvenanceDocument) -> Result<ProvenanceDocument, ModelError> {
    let mut out = a.clone();
    merge_into(&mut out, b)?;
    Ok(out)
}

/// In-place form of [`merge_documents`]. On error `target` may be partially
/// updated; callers needing atomicity merge into a clone.
pub fn merge_into(target: &mut ProvenanceDocument, other: &ProvenanceDocument) -> Result<(), ModelError> {
    target.namespaces = target.namespaces.union(&other.namespaces)?;

    for id in other.record_ids() {
        if let (Some(mine), Some(theirs)) = (target.class_of(&id), other.class_of(&id)) {
            if mine != theirs {
                return Err(ModelError::ConflictingRecord(id.to_string()));
            }
        }
    }

    let full_in = |doc: &ProvenanceDocument, id: &QualifiedId| doc.class_of(id).is_some() && !doc.is_stub(id);
    let mut incomplete: BTreeSet<QualifiedId> = target
        .incomplete_ids
        .union(&other.incomplete_ids)
        .filter(|id| !full_in(target, id) && !full_in(other, id))
        .cloned()
        .collect();

    for (id, r) in &other.entities {
        upsert(&mut target.entities, id.clone(), r)?;
    }
    for (id, r) in &other.activities {
        upsert(&mut target.activities, id.clone(), r)?;
    }
    for (id, r) in &other.agents {
        upsert(&mut target.agents, id.clone(), r)?;
    }
    for (id, r) in &other.descriptions {
        upsert(&mut target.descriptions, id.clone(), r)?;
    }
    for (k, r) in &other.parameters {
        upsert(&mut target.parameters, k.clone(), r)?;
    }
    for (k, r) in &other.used {
        upsert(&mut target.used, k.clone(), r)?;
    }
    for (k, r) in &other.generations {
        upsert(&mut target.generations, k.clone(), r)?;
    }
    for (k, r) in &other.associations {
        upsert(&mut target.associations, k.clone(), r)?;
    }
    for (k, r) in &other.attributions {
        upsert(&mut target.attributions, k.clone(), r)?;
    }
    std::mem::swap(&mut target.incomplete_ids, &mut incomplete);
    Ok(())
}

/// `(derived, source)` entity pairs: `derived` was generated by an activity
/// that used `source`. Sorted, without duplicates.
pub fn derive_progenitor_pairs(doc: &ProvenanceDocument) -> Vec<(QualifiedId, QualifiedId)> {
    let mut used_by_activity: std::collections::BTreeMap<&QualifiedId, Vec<&QualifiedId>> =
        std::collections::BTreeMap::new();
    for u in doc.used.values() {
        used_by_activity.entry(&u.activity).or_default().push(&u.entity);
    }
    let pairs: BTreeSet<(QualifiedId, QualifiedId)> = doc
        .generations
        .values()
        .flat_map(|g| {
            used_by_activity
                .get(&g.activity)
                .into_iter()
                .flatten()
                .map(move |&source| (g.entity.clone(), source.clone()))
        })
        .collect();
    pairs.into_iter().collect()
}
