//! On-disk layout.
//!
//! ```text
//! <root>/LOCK                     held by the single writer
//! <root>/CURRENT                  name of the live generation directory
//! <root>/gen-00000007/manifest.json
//! <root>/gen-00000007/<table>.jsonl
//! ```
//!
//! Every table is a JSON-lines file with one row per line. The manifest
//! records row and byte counts per table so that a truncated or edited file
//! is detected on load. A new generation is fully written and synced before
//! `CURRENT` is atomically replaced; the previous generation is kept for
//! readers still loading it, older ones are removed.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::StoreError;
use crate::model::{Namespaces, ProvenanceDocument, QualifiedId};

pub(crate) const CURRENT: &str = "CURRENT";
pub(crate) const LOCK: &str = "LOCK";
const MANIFEST: &str = "manifest.json";
const FORMAT_VERSION: u32 = 1;

/// Table names, one per record class and relation class.
pub const TABLES: [&str; 11] = [
    "namespace",
    "entity",
    "activity",
    "agent",
    "activity_description",
    "parameter",
    "used",
    "was_generated_by",
    "was_associated_with",
    "was_attributed_to",
    "incomplete",
];

#[derive(Serialize, Deserialize)]
struct TableInfo {
    rows: usize,
    bytes: u64,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: u32,
    generation: u64,
    default_prefix: String,
    tables: BTreeMap<String, TableInfo>,
}

#[derive(Serialize, Deserialize)]
struct NamespaceRow {
    prefix: String,
    uri: String,
}

#[derive(Serialize, Deserialize)]
struct IncompleteRow {
    id: QualifiedId,
}

fn corrupt(path: &Path, detail: impl Into<String>) -> StoreError {
    StoreError::CorruptStore {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

fn io_at(path: &Path, e: std::io::Error) -> StoreError {
    StoreError::Io(format!("{}: {e}", path.display()))
}

fn generation_dir(root: &Path, generation: u64) -> PathBuf {
    root.join(format!("gen-{generation:08}"))
}

fn parse_generation(name: &str) -> Option<u64> {
    name.strip_prefix("gen-")?.parse().ok()
}

/// Generation named by `CURRENT`, or `None` for a store never written.
pub(crate) fn current_generation(root: &Path) -> Result<Option<u64>, StoreError> {
    let path = root.join(CURRENT);
    match fs::read_to_string(&path) {
        Ok(text) => parse_generation(text.trim())
            .map(Some)
            .ok_or_else(|| corrupt(&path, format!("bad generation pointer {:?}", text.trim()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(io_at(&path, e)),
    }
}

fn encode_rows<'a, T: Serialize + 'a>(rows: impl Iterator<Item = &'a T>) -> (String, usize) {
    let mut text = String::new();
    let mut count = 0;
    for row in rows {
        text.push_str(&serde_json::to_string(row).expect("rows serialize"));
        text.push('\n');
        count += 1;
    }
    (text, count)
}

fn table_text(doc: &ProvenanceDocument, table: &str) -> (String, usize) {
    match table {
        "namespace" => {
            let rows: Vec<NamespaceRow> = doc
                .namespaces
                .iter()
                .map(|(p, u)| NamespaceRow {
                    prefix: p.to_owned(),
                    uri: u.to_owned(),
                })
                .collect();
            encode_rows(rows.iter())
        }
        "entity" => encode_rows(doc.entities.values()),
        "activity" => encode_rows(doc.activities.values()),
        "agent" => encode_rows(doc.agents.values()),
        "activity_description" => encode_rows(doc.descriptions.values()),
        "parameter" => encode_rows(doc.parameters.values()),
        "used" => encode_rows(doc.used.values()),
        "was_generated_by" => encode_rows(doc.generations.values()),
        "was_associated_with" => encode_rows(doc.associations.values()),
        "was_attributed_to" => encode_rows(doc.attributions.values()),
        "incomplete" => {
            let rows: Vec<IncompleteRow> = doc
                .incomplete_ids
                .iter()
                .map(|id| IncompleteRow { id: id.clone() })
                .collect();
            encode_rows(rows.iter())
        }
        other => unreachable!("unknown table {other}"),
    }
}

fn write_synced(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let mut file = File::create(path).map_err(|e| io_at(path, e))?;
    file.write_all(bytes).map_err(|e| io_at(path, e))?;
    file.sync_all().map_err(|e| io_at(path, e))
}

fn sync_dir(path: &Path) -> Result<(), StoreError> {
    File::open(path)
        .and_then(|d| d.sync_all())
        .map_err(|e| io_at(path, e))
}

/// Writes `doc` as generation `generation` and makes it current.
pub(crate) fn write_generation(root: &Path, generation: u64, doc: &ProvenanceDocument) -> Result<(), StoreError> {
    let dir = generation_dir(root, generation);
    if dir.exists() {
        fs::remove_dir_all(&dir).map_err(|e| io_at(&dir, e))?;
    }
    fs::create_dir_all(&dir).map_err(|e| io_at(&dir, e))?;

    let mut tables = BTreeMap::new();
    for table in TABLES {
        let (text, rows) = table_text(doc, table);
        write_synced(&dir.join(format!("{table}.jsonl")), text.as_bytes())?;
        tables.insert(
            table.to_owned(),
            TableInfo {
                rows,
                bytes: text.len() as u64,
            },
        );
    }
    let manifest = Manifest {
        format: FORMAT_VERSION,
        generation,
        default_prefix: doc.namespaces.default_prefix().to_owned(),
        tables,
    };
    let manifest_text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_synced(&dir.join(MANIFEST), manifest_text.as_bytes())?;
    sync_dir(&dir)?;

    let tmp = root.join("CURRENT.tmp");
    write_synced(&tmp, format!("gen-{generation:08}\n").as_bytes())?;
    let current = root.join(CURRENT);
    fs::rename(&tmp, &current).map_err(|e| io_at(&current, e))?;
    sync_dir(root)?;

    remove_old_generations(root, generation);
    Ok(())
}

fn remove_old_generations(root: &Path, live: u64) {
    let Ok(entries) = fs::read_dir(root) else {
        return;
    };
    for entry in entries.flatten() {
        let name = entry.file_name();
        if let Some(g) = name.to_str().and_then(parse_generation) {
            if g + 1 < live {
                if let Err(e) = fs::remove_dir_all(entry.path()) {
                    log::warn!("could not remove old generation {}: {e}", entry.path().display());
                }
            }
        }
    }
}

fn read_rows<T: DeserializeOwned>(path: &Path, text: &str) -> Result<Vec<T>, StoreError> {
    text.lines()
        .enumerate()
        .map(|(n, line)| {
            serde_json::from_str(line).map_err(|e| corrupt(path, format!("line {}: {e}", n + 1)))
        })
        .collect()
}

/// Loads generation `generation` and checks it against its manifest.
pub(crate) fn read_generation(root: &Path, generation: u64) -> Result<ProvenanceDocument, StoreError> {
    let dir = generation_dir(root, generation);
    let manifest_path = dir.join(MANIFEST);
    let manifest_text = fs::read_to_string(&manifest_path).map_err(|e| corrupt(&manifest_path, e.to_string()))?;
    let manifest: Manifest =
        serde_json::from_str(&manifest_text).map_err(|e| corrupt(&manifest_path, e.to_string()))?;
    if manifest.format != FORMAT_VERSION {
        return Err(corrupt(&manifest_path, format!("unsupported format {}", manifest.format)));
    }
    if manifest.generation != generation {
        return Err(corrupt(&manifest_path, "generation number mismatch"));
    }

    let mut texts = BTreeMap::new();
    for table in TABLES {
        let path = dir.join(format!("{table}.jsonl"));
        let info = manifest
            .tables
            .get(table)
            .ok_or_else(|| corrupt(&manifest_path, format!("table {table} missing from manifest")))?;
        let text = fs::read_to_string(&path).map_err(|e| corrupt(&path, e.to_string()))?;
        if text.len() as u64 != info.bytes {
            return Err(corrupt(
                &path,
                format!("expected {} bytes, found {}", info.bytes, text.len()),
            ));
        }
        let rows = text.lines().count();
        if rows != info.rows {
            return Err(corrupt(&path, format!("expected {} rows, found {rows}", info.rows)));
        }
        texts.insert(table, (path, text));
    }

    let (path, text) = &texts["namespace"];
    let map = read_rows::<NamespaceRow>(path, text)?
        .into_iter()
        .map(|r| (r.prefix, r.uri))
        .collect();
    let namespaces =
        Namespaces::from_map(&manifest.default_prefix, map).map_err(|e| corrupt(path, e.to_string()))?;
    let mut doc = ProvenanceDocument::new(namespaces);

    macro_rules! load {
        ($table:literal, $field:ident, $key:expr) => {{
            let (path, text) = &texts[$table];
            for row in read_rows(path, text)? {
                let key = $key(&row);
                if doc.$field.insert(key, row).is_some() {
                    return Err(corrupt(path, "duplicate key"));
                }
            }
        }};
    }
    load!("entity", entities, |r: &crate::model::Entity| r.id.clone());
    load!("activity", activities, |r: &crate::model::Activity| r.id.clone());
    load!("agent", agents, |r: &crate::model::Agent| r.id.clone());
    load!("activity_description", descriptions, |r: &crate::model::ActivityDescription| r.id.clone());
    load!("parameter", parameters, |r: &crate::model::Parameter| r.key());
    load!("used", used, |r: &crate::model::Used| r.key());
    load!("was_generated_by", generations, |r: &crate::model::WasGeneratedBy| r.key());
    load!("was_associated_with", associations, |r: &crate::model::WasAssociatedWith| r.key());
    load!("was_attributed_to", attributions, |r: &crate::model::WasAttributedTo| r.key());

    let (path, text) = &texts["incomplete"];
    for row in read_rows::<IncompleteRow>(path, text)? {
        if doc.class_of(&row.id).is_none() {
            return Err(corrupt(path, format!("stub {} has no record", row.id)));
        }
        doc.incomplete_ids.insert(row.id);
    }
    Ok(doc)
}
