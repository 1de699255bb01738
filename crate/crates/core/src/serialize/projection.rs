use std::str::FromStr;

use crate::model::{vocab, ProvenanceDocument};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ModelFlavor {
    #[default]
    Ivoa,
    W3c,
}

impl FromStr for ModelFlavor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("ivoa") {
            Ok(ModelFlavor::Ivoa)
        } else if s.eq_ignore_ascii_case("w3c") {
            Ok(ModelFlavor::W3c)
        } else {
            Err(format!("model must be IVOA or W3C, got {s:?}"))
        }
    }
}

/// How much of the activity descriptions to keep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DescriptionLevel {
    /// Drop description records and the references to them.
    None,
    /// Keep `description_ref` on activities, drop the records.
    #[default]
    Reference,
    Full,
}

impl FromStr for DescriptionLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "0" => Ok(DescriptionLevel::None),
            "1" => Ok(DescriptionLevel::Reference),
            "2" => Ok(DescriptionLevel::Full),
            _ => Err(format!("descriptions must be 0, 1 or 2, got {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProjectionOptions {
    pub model: ModelFlavor,
    pub agents: bool,
    pub configuration: bool,
    pub descriptions: DescriptionLevel,
    pub attributes: bool,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            model: ModelFlavor::Ivoa,
            agents: true,
            configuration: true,
            descriptions: DescriptionLevel::Reference,
            attributes: true,
        }
    }
}

/// Parses the `0`/`1` inclusion flags.
pub fn parse_flag(s: &str) -> Result<bool, String> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(format!("expected 0 or 1, got {s:?}")),
    }
}

/// Filters and remaps a document. Inclusion flags apply first, then the W3C
/// rewrite, then attribute removal, which makes the projection idempotent.
pub fn apply_projection(doc: &ProvenanceDocument, opts: &ProjectionOptions) -> ProvenanceDocument {
    let mut out = doc.clone();

    if !opts.agents {
        let agent_ids: Vec<_> = out.agents.keys().cloned().collect();
        for id in agent_ids {
            out.incomplete_ids.remove(&id);
        }
        out.agents.clear();
        out.associations.clear();
        out.attributions.clear();
    }
    if !opts.configuration {
        out.parameters.clear();
    }
    match opts.descriptions {
        DescriptionLevel::None => {
            drop_descriptions(&mut out);
            for a in out.activities.values_mut() {
                a.description_ref = None;
            }
        }
        DescriptionLevel::Reference => drop_descriptions(&mut out),
        DescriptionLevel::Full => {}
    }

    if opts.model == ModelFlavor::W3c {
        let parameters = std::mem::take(&mut out.parameters);
        for p in parameters.into_values() {
            if let Some(a) = out.activities.get_mut(&p.activity) {
                a.attributes
                    .insert(format!("{}{}", vocab::PARAMETER_PREFIX, p.name), p.value);
            }
        }
        let descriptions = std::mem::take(&mut out.descriptions);
        for d in descriptions.values() {
            out.incomplete_ids.remove(&d.id);
        }
        for a in out.activities.values_mut() {
            let Some(desc) = a.description_ref.as_ref().and_then(|r| descriptions.get(r)) else {
                continue;
            };
            a.attributes.insert(vocab::DESC_NAME.into(), desc.name.clone());
            if let Some(v) = &desc.version {
                a.attributes.insert(vocab::DESC_VERSION.into(), v.clone());
            }
            if let Some(u) = &desc.docurl {
                a.attributes.insert(vocab::DESC_DOCURL.into(), u.clone());
            }
            if let Some(c) = &desc.code_reference {
                a.attributes.insert(vocab::CODE_REF.into(), c.render());
            }
            a.description_ref = None;
        }
    }

    if !opts.attributes {
        for e in out.entities.values_mut() {
            e.attributes.clear();
        }
        for a in out.activities.values_mut() {
            a.attributes.clear();
        }
        for g in out.agents.values_mut() {
            g.attributes.clear();
        }
    }
    out
}

fn drop_descriptions(doc: &mut ProvenanceDocument) {
    let ids: Vec<_> = doc.descriptions.keys().cloned().collect();
    for id in ids {
        doc.incomplete_ids.remove(&id);
    }
    doc.descriptions.clear();
}
