use std::collections::BTreeMap;

use super::cards::{string_cards, string_values};
use super::LastStepError;
use crate::model::{QualifiedId, Timestamp};

pub const PRV_ID: &str = "PRV_ID";
pub const PRV_NAME: &str = "PRV_NAME";
pub const PRV_GENT: &str = "PRV_GENT";
pub const PRV_LOC: &str = "PRV_LOC";
pub const PRV_CTC: &str = "PRV_CTC";
pub const PRV_CTCI: &str = "PRV_CTCI";
pub const PRV_CTCE: &str = "PRV_CTCE";
pub const PRV_ACT: &str = "PRV_ACT";
pub const PRV_ACTN: &str = "PRV_ACTN";
pub const PRV_TSTR: &str = "PRV_TSTR";
pub const PRV_TEND: &str = "PRV_TEND";
pub const PRV_DESC: &str = "PRV_DESC";
pub const PRV_VER: &str = "PRV_VER";
/// Indexed families: `PRV_U1`.. used entities, `PRV_G1`.. sibling
/// outputs, `PRV_P1`.. parameters as `name=value`.
pub const USED_FAMILY: &str = "PRV_U";
pub const SIBLING_FAMILY: &str = "PRV_G";
pub const PARAMETER_FAMILY: &str = "PRV_P";
pub const MAX_INDEX: usize = 999;

/// Minimal flat provenance of one entity: the entity itself, one contact
/// agent, the activity that generated it and the ids of that activity's
/// other inputs and outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LastStepRecord {
    pub entity_id: QualifiedId,
    pub entity_name: Option<String>,
    pub generated_at: Option<Timestamp>,
    pub location: Option<String>,
    pub contact_name: Option<String>,
    pub contact_id: Option<QualifiedId>,
    pub contact_email: Option<String>,
    pub activity_id: Option<QualifiedId>,
    pub activity_name: Option<String>,
    pub activity_start: Option<Timestamp>,
    pub activity_end: Option<Timestamp>,
    pub description_name: Option<String>,
    pub description_version: Option<String>,
    pub used_ids: Vec<QualifiedId>,
    pub sibling_generated_ids: Vec<QualifiedId>,
    pub parameters: Vec<(String, String)>,
}

impl LastStepRecord {
    pub fn new(entity_id: QualifiedId) -> Self {
        LastStepRecord {
            entity_id,
            entity_name: None,
            generated_at: None,
            location: None,
            contact_name: None,
            contact_id: None,
            contact_email: None,
            activity_id: None,
            activity_name: None,
            activity_start: None,
            activity_end: None,
            description_name: None,
            description_version: None,
            used_ids: Vec::new(),
            sibling_generated_ids: Vec::new(),
            parameters: Vec::new(),
        }
    }

    /// Checks the record invariants that emitting relies on.
    pub fn check(&self) -> Result<(), LastStepError> {
        let invalid = |m: &str| Err(LastStepError::InvalidRecord(m.to_owned()));
        let has_activity_detail = self.activity_name.is_some()
            || self.activity_start.is_some()
            || self.activity_end.is_some()
            || self.description_name.is_some()
            || self.description_version.is_some()
            || !self.used_ids.is_empty()
            || !self.sibling_generated_ids.is_empty()
            || !self.parameters.is_empty();
        if self.activity_id.is_none() && has_activity_detail {
            return invalid("activity fields present without an activity id");
        }
        if self.used_ids.contains(&self.entity_id) {
            return invalid("used ids contain the entity itself");
        }
        if self.sibling_generated_ids.contains(&self.entity_id) {
            return invalid("sibling ids contain the entity itself");
        }
        if let Some((name, _)) = self.parameters.iter().find(|(n, _)| n.is_empty() || n.contains('=')) {
            return Err(LastStepError::InvalidRecord(format!("bad parameter name {name:?}")));
        }
        Ok(())
    }
}

fn push(out: &mut Vec<String>, keyword: &str, value: Option<String>, comment: &str) -> Result<(), LastStepError> {
    if let Some(v) = value {
        out.extend(string_cards(keyword, &v, Some(comment))?);
    }
    Ok(())
}

fn family<T>(
    out: &mut Vec<String>,
    prefix: &str,
    items: &[T],
    render: impl Fn(&T) -> String,
) -> Result<(), LastStepError> {
    if items.len() > MAX_INDEX {
        return Err(LastStepError::TooManyIndexed {
            family: prefix.to_owned(),
            count: items.len(),
        });
    }
    for (n, item) in items.iter().enumerate() {
        out.extend(string_cards(&format!("{prefix}{}", n + 1), &render(item), None)?);
    }
    Ok(())
}

/// Card images for `record`, in vocabulary order. Absent fields emit no
/// card; every card is exactly 80 columns.
pub fn emit_header_cards(record: &LastStepRecord) -> Result<Vec<String>, LastStepError> {
    record.check()?;
    let s = |v: &Option<String>| v.clone();
    let id = |v: &Option<QualifiedId>| v.as_ref().map(ToString::to_string);
    let t = |v: &Option<Timestamp>| v.as_ref().map(ToString::to_string);

    let mut out = Vec::new();
    push(&mut out, PRV_ID, Some(record.entity_id.to_string()), "entity id")?;
    push(&mut out, PRV_NAME, s(&record.entity_name), "entity name")?;
    push(&mut out, PRV_GENT, t(&record.generated_at), "generation time")?;
    push(&mut out, PRV_LOC, s(&record.location), "entity location")?;
    push(&mut out, PRV_CTC, s(&record.contact_name), "contact agent")?;
    push(&mut out, PRV_CTCI, id(&record.contact_id), "contact agent id")?;
    push(&mut out, PRV_CTCE, s(&record.contact_email), "contact email")?;
    push(&mut out, PRV_ACT, id(&record.activity_id), "generating activity")?;
    push(&mut out, PRV_ACTN, s(&record.activity_name), "activity name")?;
    push(&mut out, PRV_TSTR, t(&record.activity_start), "activity start")?;
    push(&mut out, PRV_TEND, t(&record.activity_end), "activity end")?;
    push(&mut out, PRV_DESC, s(&record.description_name), "activity description")?;
    push(&mut out, PRV_VER, s(&record.description_version), "description version")?;
    family(&mut out, USED_FAMILY, &record.used_ids, ToString::to_string)?;
    family(&mut out, SIBLING_FAMILY, &record.sibling_generated_ids, ToString::to_string)?;
    family(&mut out, PARAMETER_FAMILY, &record.parameters, |(n, v)| format!("{n}={v}"))?;
    Ok(out)
}

fn family_index(keyword: &str, prefix: &str) -> Option<usize> {
    let digits = keyword.strip_prefix(prefix)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().filter(|n| (1..=MAX_INDEX).contains(n))
}

/// Inverse of [`emit_header_cards`]. Cards outside the `PRV_` vocabulary
/// are ignored; indexed families are ordered by index.
pub fn parse_header_cards(cards: &[String]) -> Result<LastStepRecord, LastStepError> {
    let mut scalars: BTreeMap<&'static str, (usize, String)> = BTreeMap::new();
    let mut used: BTreeMap<usize, (usize, String)> = BTreeMap::new();
    let mut siblings: BTreeMap<usize, (usize, String)> = BTreeMap::new();
    let mut params: BTreeMap<usize, (usize, String)> = BTreeMap::new();
    let scalar_keys = [
        PRV_ID, PRV_NAME, PRV_GENT, PRV_LOC, PRV_CTC, PRV_CTCI, PRV_CTCE, PRV_ACT, PRV_ACTN, PRV_TSTR, PRV_TEND,
        PRV_DESC, PRV_VER,
    ];

    let mut seen_any = false;
    for (index, keyword, text) in string_values(cards)? {
        if !keyword.starts_with("PRV_") {
            continue;
        }
        seen_any = true;
        let duplicate = || LastStepError::DuplicateKeyword(keyword.clone());
        if let Some(k) = scalar_keys.iter().find(|k| **k == keyword) {
            if scalars.insert(k, (index, text)).is_some() {
                return Err(duplicate());
            }
            continue;
        }
        let slot = if let Some(n) = family_index(&keyword, USED_FAMILY) {
            used.insert(n, (index, text))
        } else if let Some(n) = family_index(&keyword, SIBLING_FAMILY) {
            siblings.insert(n, (index, text))
        } else if let Some(n) = family_index(&keyword, PARAMETER_FAMILY) {
            params.insert(n, (index, text))
        } else {
            return Err(LastStepError::MalformedCard {
                index,
                detail: format!("unknown provenance keyword {keyword}"),
            });
        };
        if slot.is_some() {
            return Err(duplicate());
        }
    }
    if !seen_any {
        return Err(LastStepError::NoProvenance);
    }

    let bad = |index: usize, detail: String| LastStepError::MalformedCard { index, detail };
    let parse_id = |(index, text): &(usize, String)| QualifiedId::from_rendered(text).map_err(|e| bad(*index, e.to_string()));
    let parse_time = |(index, text): &(usize, String)| Timestamp::parse(text).map_err(|e| bad(*index, e.to_string()));

    let entity_id = scalars
        .get(PRV_ID)
        .ok_or_else(|| bad(0, "PRV_ID card missing".into()))
        .and_then(parse_id)?;
    let mut r = LastStepRecord::new(entity_id);
    let text = |k: &str| scalars.get(k).map(|(_, t)| t.clone());
    r.entity_name = text(PRV_NAME);
    r.generated_at = scalars.get(PRV_GENT).map(parse_time).transpose()?;
    r.location = text(PRV_LOC);
    r.contact_name = text(PRV_CTC);
    r.contact_id = scalars.get(PRV_CTCI).map(parse_id).transpose()?;
    r.contact_email = text(PRV_CTCE);
    r.activity_id = scalars.get(PRV_ACT).map(parse_id).transpose()?;
    r.activity_name = text(PRV_ACTN);
    r.activity_start = scalars.get(PRV_TSTR).map(parse_time).transpose()?;
    r.activity_end = scalars.get(PRV_TEND).map(parse_time).transpose()?;
    r.description_name = text(PRV_DESC);
    r.description_version = text(PRV_VER);
    r.used_ids = used.values().map(parse_id).collect::<Result<_, _>>()?;
    r.sibling_generated_ids = siblings.values().map(parse_id).collect::<Result<_, _>>()?;
    r.parameters = params
        .values()
        .map(|(index, text)| {
            text.split_once('=')
                .map(|(n, v)| (n.to_owned(), v.to_owned()))
                .ok_or_else(|| bad(*index, format!("parameter card {text:?} is not name=value")))
        })
        .collect::<Result<_, _>>()?;
    r.check().map_err(|e| bad(0, e.to_string()))?;
    Ok(r)
}
