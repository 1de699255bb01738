//! Durable provenance store with depth/direction traversal.
//!
//! One writer at a time (guarded by a lock file), any number of readers.
//! Readers hold an `Arc` to an immutable snapshot, so an ingest becomes
//! visible all at once when its snapshot is swapped in.

mod disk;
mod index;
mod traverse;

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use crate::model::{
    merge_into, validate_document, ModelError, ProvenanceDocument, QualifiedId, Record,
    ValidationReport,
};

pub use disk::TABLES;
pub use index::StoreIndex;
pub use traverse::{traverse_document, traverse_with_index, Depth, Direction};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("no record with id {0}")]
    NotFound(QualifiedId),
    #[error("conflicting record {0}")]
    ConflictingRecord(String),
    #[error("document has validation errors: {}", summarize(.0))]
    InvalidDocument(ValidationReport),
    #[error("corrupt store at {}: {detail}", path.display())]
    CorruptStore { path: PathBuf, detail: String },
    #[error("store {} is locked by another writer", .0.display())]
    Locked(PathBuf),
    #[error("store opened read-only")]
    ReadOnly,
    #[error("{0}")]
    Model(ModelError),
    #[error("i/o error: {0}")]
    Io(String),
}

fn summarize(report: &ValidationReport) -> String {
    report.errors().map(|f| f.to_string()).collect::<Vec<_>>().join("; ")
}

impl From<ModelError> for StoreError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::ConflictingRecord(id) => StoreError::ConflictingRecord(id),
            other => StoreError::Model(other),
        }
    }
}

/// Row counts of one ingest. Records, parameters and relations are rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub inserted: usize,
    pub updated: usize,
    pub unchanged: usize,
}

/// Immutable view of the store contents at one generation.
#[derive(Debug, Default)]
pub struct Snapshot {
    generation: Option<u64>,
    doc: ProvenanceDocument,
    index: StoreIndex,
}

impl Snapshot {
    fn new(generation: Option<u64>, doc: ProvenanceDocument) -> Self {
        let index = StoreIndex::build(&doc);
        Snapshot { generation, doc, index }
    }

    pub fn document(&self) -> &ProvenanceDocument {
        &self.doc
    }

    pub fn index(&self) -> &StoreIndex {
        &self.index
    }

    pub fn generation(&self) -> Option<u64> {
        self.generation
    }
}

struct Writer {
    _lock: File,
    serial: Mutex<()>,
}

pub struct Store {
    root: PathBuf,
    writer: Option<Writer>,
    snapshot: RwLock<Arc<Snapshot>>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("root", &self.root)
            .field("writable", &self.writer.is_some())
            .finish()
    }
}

fn load(root: &Path) -> Result<Snapshot, StoreError> {
    match disk::current_generation(root)? {
        None => Ok(Snapshot::default()),
        Some(g) => Ok(Snapshot::new(Some(g), disk::read_generation(root, g)?)),
    }
}

impl Store {
    /// Opens the store at `root` for writing, creating it if needed. Fails
    /// with [`StoreError::Locked`] while another writer holds it.
    pub fn open(root: impl AsRef<Path>) -> Result<Self, StoreError> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(|e| StoreError::Io(format!("{}: {e}", root.display())))?;
        let lock_path = root.join(disk::LOCK);
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)
            .map_err(|e| StoreError::Io(format!("{}: {e}", lock_path.display())))?;
        lock.try_lock().map_err(|_| StoreError::Locked(root.clone()))?;
        let snapshot = load(&root)?;
        Ok(Store {
            root,
            writer: Some(Writer {
                _lock: lock,
                serial: Mutex::new(()),
            }),
            snapshot: RwLock::new(Arc::new(snapshot)),
        })
    }

    /// Opens an existing store for reading only. Does not take the lock.
    pub fn open_read_only(root: impl AsRef<Path>) -> Result<Self, StoreError> {
        let root = root.as_ref().to_path_buf();
        if !root.is_dir() {
            return Err(StoreError::Io(format!("{}: no such store directory", root.display())));
        }
        let snapshot = load(&root)?;
        Ok(Store {
            root,
            writer: None,
            snapshot: RwLock::new(Arc::new(snapshot)),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn is_read_only(&self) -> bool {
        self.writer.is_none()
    }

    /// The current snapshot. Holding it does not block writers.
    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock poisoned").clone()
    }

    fn install(&self, snapshot: Snapshot) {
        *self.snapshot.write().expect("snapshot lock poisoned") = Arc::new(snapshot);
    }

    /// Upserts every row of `doc`. The document must validate without
    /// errors, and so must the merged store contents; otherwise nothing is
    /// written.
    pub fn ingest_document(&self, doc: &ProvenanceDocument) -> Result<IngestStats, StoreError> {
        let writer = self.writer.as_ref().ok_or(StoreError::ReadOnly)?;
        let _guard = writer.serial.lock().expect("writer lock poisoned");

        let report = validate_document(doc);
        if report.has_errors() {
            return Err(StoreError::InvalidDocument(report));
        }
        let current = self.snapshot();
        let old = &current.doc;
        let mut merged = old.clone();
        merge_into(&mut merged, doc)?;
        let report = validate_document(&merged);
        if report.has_errors() {
            return Err(StoreError::InvalidDocument(report));
        }

        let stats = diff_stats(old, &merged, doc);
        if stats.inserted + stats.updated == 0 && merged.namespaces == old.namespaces {
            return Ok(stats);
        }
        let generation = current.generation.map_or(1, |g| g + 1);
        disk::write_generation(&self.root, generation, &merged)?;
        self.install(Snapshot::new(Some(generation), merged));
        log::info!(
            "ingested into generation {generation}: {} inserted, {} updated, {} unchanged",
            stats.inserted,
            stats.updated,
            stats.unchanged
        );
        Ok(stats)
    }

    pub fn get_record(&self, id: &QualifiedId) -> Result<Record, StoreError> {
        self.snapshot()
            .doc
            .record(id)
            .ok_or_else(|| StoreError::NotFound(id.clone()))
    }

    /// Whether `id` names a stub in the store.
    pub fn is_stub(&self, id: &QualifiedId) -> bool {
        self.snapshot().doc.is_stub(id)
    }

    pub fn traverse(&self, start: &QualifiedId, depth: Depth, direction: Direction) -> Result<ProvenanceDocument, StoreError> {
        let snap = self.snapshot();
        traverse_with_index(&snap.doc, &snap.index, start, depth, direction)
    }

    /// Reloads the persisted record set and rebuilds every index from it.
    pub fn rebuild_indexes(&self) -> Result<(), StoreError> {
        let _guard = self
            .writer
            .as_ref()
            .map(|w| w.serial.lock().expect("writer lock poisoned"));
        let snapshot = load(&self.root)?;
        self.install(snapshot);
        Ok(())
    }

    /// Picks up a generation committed by another process. Returns whether
    /// anything changed.
    pub fn refresh(&self) -> Result<bool, StoreError> {
        let on_disk = disk::current_generation(&self.root)?;
        if on_disk == self.snapshot().generation {
            return Ok(false);
        }
        self.rebuild_indexes()?;
        Ok(true)
    }
}

fn classify<K: Ord, V: PartialEq>(
    stats: &mut IngestStats,
    incoming: &BTreeMap<K, V>,
    old: &BTreeMap<K, V>,
    new: &BTreeMap<K, V>,
    stub_change: impl Fn(&K) -> bool,
) {
    for key in incoming.keys() {
        match old.get(key) {
            None => stats.inserted += 1,
            Some(before) if before != &new[key] || stub_change(key) => stats.updated += 1,
            Some(_) => stats.unchanged += 1,
        }
    }
}

fn diff_stats(old: &ProvenanceDocument, new: &ProvenanceDocument, incoming: &ProvenanceDocument) -> IngestStats {
    let mut s = IngestStats::default();
    let upgraded = |id: &QualifiedId| old.is_stub(id) && !new.is_stub(id);
    classify(&mut s, &incoming.entities, &old.entities, &new.entities, upgraded);
    classify(&mut s, &incoming.activities, &old.activities, &new.activities, upgraded);
    classify(&mut s, &incoming.agents, &old.agents, &new.agents, upgraded);
    classify(&mut s, &incoming.descriptions, &old.descriptions, &new.descriptions, upgraded);
    classify(&mut s, &incoming.parameters, &old.parameters, &new.parameters, |_| false);
    classify(&mut s, &incoming.used, &old.used, &new.used, |_| false);
    classify(&mut s, &incoming.generations, &old.generations, &new.generations, |_| false);
    classify(&mut s, &incoming.associations, &old.associations, &new.associations, |_| false);
    classify(&mut s, &incoming.attributions, &old.attributions, &new.attributions, |_| false);
    s
}
