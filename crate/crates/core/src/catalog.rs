//! Append-only run catalog.
//!
//! On disk a catalog directory holds:
//!
//! * `log`: JSON lines. The first line is the header `{"catalog_version":1}`;
//!   every following line is a [`LogRecord`]. A run becomes visible only
//!   once its `commit` record is on disk, so a torn append never exposes a
//!   partial run.
//! * `blobs/<sha256>`: verbatim block payloads, content addressed.
//! * `LOCK`: advisory lock file held by the single writer.
//!
//! Readers work against an immutable [`CatalogView`]. Writers build the next
//! view off to the side and swap it in after the commit record is durable,
//! so a reader observes either the old run or the new run, never a mix.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::payload::{ApiPayload, DaoId, RunId};
use crate::snapshot::{
    parse_snapshot, parse_snapshot_value, BlockKind, DaoSnapshot, Issue, IssueKind, ParsedSnapshot, Severity,
    SnapshotError,
};

pub const CATALOG_VERSION: u64 = 1;
const LOG_FILE: &str = "log";
const BLOB_DIR: &str = "blobs";
const LOCK_FILE: &str = "LOCK";

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("cannot read data directory {path}: {source}")]
    DirectoryUnreadable { path: PathBuf, source: io::Error },
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("no catalog at {0}")]
    NotFound(PathBuf),
    #[error("catalog log line {line} is invalid: {message}")]
    CorruptLog { line: usize, message: String },
    #[error("unsupported catalog version {0}")]
    UnsupportedVersion(u64),
    #[error("blob {digest}: {message}")]
    Blob { digest: String, message: String },
    #[error("unknown DAO `{0}`")]
    UnknownDao(String),
    #[error("DAO name `{0}` is present on more than one chain")]
    AmbiguousDao(String),
    #[error("unknown run {0}")]
    UnknownRun(RunId),
    #[error("run {run_id} does not belong to DAO `{dao}`")]
    RunDaoMismatch { run_id: RunId, dao: String },
    #[error("{path}: snapshot rejected: {source}")]
    Rejected { path: PathBuf, source: SnapshotError },
    #[error("{path} describes DAO `{found}`, expected `{expected}`")]
    DaoMismatch { path: PathBuf, expected: String, found: String },
    #[error("invalid bundle: {0}")]
    InvalidBundle(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CatalogError + '_ {
    move |source| CatalogError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DaoRecord {
    pub dao_id: DaoId,
    pub dao_name: String,
    pub chain_id: u64,
}

/// Provenance of one import.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricRun {
    pub run_id: RunId,
    pub dao_id: DaoId,
    pub dao_name: String,
    pub chain_id: u64,
    /// Capture time carried by the snapshot document itself.
    pub timestamp: Option<String>,
    pub created_at: String,
    pub source_path: String,
    pub content_digest: String,
}

/// One stored block of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSnapshot {
    pub run_id: RunId,
    pub block_name: BlockKind,
    pub digest: String,
    pub payload: Arc<Map<String, Value>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum LogRecord {
    Dao(DaoRecord),
    Run(MetricRun),
    Block { run_id: RunId, block_name: BlockKind, digest: String },
    Commit { run_id: RunId },
}

#[derive(Debug, Clone)]
struct RunEntry {
    run: MetricRun,
    blocks: Vec<MetricSnapshot>,
}

#[derive(Debug, Clone)]
struct DaoEntry {
    record: DaoRecord,
    /// Committed runs, oldest first.
    runs: Vec<RunId>,
}

/// A snapshot reassembled from the blocks of one committed run.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredSnapshot {
    pub run: MetricRun,
    pub blocks: Vec<MetricSnapshot>,
    pub snapshot: DaoSnapshot,
}

/// Immutable index over committed runs.
#[derive(Debug, Clone, Default)]
pub struct CatalogView {
    daos: BTreeMap<DaoId, DaoEntry>,
    by_key: HashMap<(String, u64), DaoId>,
    runs: BTreeMap<RunId, RunEntry>,
}

impl CatalogView {
    /// DAOs in ascending id order.
    pub fn daos(&self) -> impl ExactSizeIterator<Item = &DaoRecord> {
        self.daos.values().map(|e| &e.record)
    }

    pub fn dao_count(&self) -> usize {
        self.daos.len()
    }

    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    pub fn dao(&self, id: DaoId) -> Option<&DaoRecord> {
        self.daos.get(&id).map(|e| &e.record)
    }

    pub fn dao_id(&self, dao_name: &str, chain_id: u64) -> Option<DaoId> {
        self.by_key.get(&(dao_name.trim().to_string(), chain_id)).copied()
    }

    /// Resolves a DAO by name alone; fails if the name spans several chains.
    pub fn dao_id_by_name(&self, dao_name: &str) -> Result<DaoId, CatalogError> {
        let name = dao_name.trim();
        let mut matches = self.daos.values().filter(|e| e.record.dao_name == name);
        match (matches.next(), matches.next()) {
            (Some(e), None) => Ok(e.record.dao_id),
            (Some(_), Some(_)) => Err(CatalogError::AmbiguousDao(name.to_string())),
            (None, _) => Err(CatalogError::UnknownDao(name.to_string())),
        }
    }

    /// Runs of one DAO, newest first.
    pub fn runs(&self, id: DaoId) -> Option<Vec<&MetricRun>> {
        let entry = self.daos.get(&id)?;
        Some(entry.runs.iter().rev().map(|r| &self.runs[r].run).collect())
    }

    pub fn latest_run(&self, id: DaoId) -> Option<&MetricRun> {
        let entry = self.daos.get(&id)?;
        entry.runs.last().map(|r| &self.runs[r].run)
    }

    pub fn run(&self, run_id: RunId) -> Option<&MetricRun> {
        self.runs.get(&run_id).map(|e| &e.run)
    }

    pub fn blocks(&self, run_id: RunId) -> Option<&[MetricSnapshot]> {
        self.runs.get(&run_id).map(|e| e.blocks.as_slice())
    }

    /// Resolves `run_id` (or the latest run when `None`) for a DAO.
    fn resolve_run(&self, id: DaoId, run_id: Option<RunId>) -> Result<&RunEntry, CatalogError> {
        let dao = self.daos.get(&id).ok_or_else(|| CatalogError::UnknownDao(id.to_string()))?;
        let run_id = match run_id {
            Some(r) => r,
            None => *dao.runs.last().ok_or_else(|| CatalogError::UnknownDao(id.to_string()))?,
        };
        let entry = self.runs.get(&run_id).ok_or(CatalogError::UnknownRun(run_id))?;
        if entry.run.dao_id != id {
            return Err(CatalogError::RunDaoMismatch { run_id, dao: dao.record.dao_name.clone() });
        }
        Ok(entry)
    }

    /// The served payload for a DAO at its latest run or at `run_id`.
    pub fn payload(&self, id: DaoId, run_id: Option<RunId>) -> Result<ApiPayload, CatalogError> {
        let entry = self.resolve_run(id, run_id)?;
        let mut payload = ApiPayload {
            dao_id: id,
            dao_name: entry.run.dao_name.clone(),
            chain_id: entry.run.chain_id,
            timestamp: entry.run.timestamp.clone(),
            network_participation: Map::new(),
            accumulated_funds: Map::new(),
            voting_efficiency: Map::new(),
            decentralisation: Map::new(),
            health_metrics: Map::new(),
        };
        for block in &entry.blocks {
            *payload.block_mut(block.block_name) = (*block.payload).clone();
        }
        Ok(payload)
    }

    pub fn snapshot(&self, id: DaoId, run_id: Option<RunId>) -> Result<StoredSnapshot, CatalogError> {
        let entry = self.resolve_run(id, run_id)?;
        let mut doc = Map::new();
        doc.insert("dao_name".into(), entry.run.dao_name.clone().into());
        doc.insert("chain_id".into(), entry.run.chain_id.into());
        if let Some(ts) = &entry.run.timestamp {
            doc.insert("timestamp".into(), ts.clone().into());
        }
        for block in &entry.blocks {
            doc.insert(block.block_name.as_str().into(), Value::Object((*block.payload).clone()));
        }
        let parsed = parse_snapshot_value(&Value::Object(doc)).map_err(|e| CatalogError::CorruptLog {
            line: 0,
            message: format!("run {} does not reassemble: {e}", entry.run.run_id),
        })?;
        Ok(StoredSnapshot { run: entry.run.clone(), blocks: entry.blocks.clone(), snapshot: parsed.snapshot })
    }

    pub fn latest_snapshot(&self, dao_name: &str) -> Result<StoredSnapshot, CatalogError> {
        self.snapshot(self.dao_id_by_name(dao_name)?, None)
    }

    pub fn run_scoped_snapshot(&self, dao_name: &str, run_id: RunId) -> Result<StoredSnapshot, CatalogError> {
        let id = self.dao_id_by_name(dao_name)?;
        let run = self.runs.get(&run_id).ok_or(CatalogError::UnknownRun(run_id))?;
        if run.run.dao_id != id {
            return Err(CatalogError::RunDaoMismatch { run_id, dao: dao_name.trim().to_string() });
        }
        self.snapshot(id, Some(run_id))
    }

    fn next_dao_id(&self) -> DaoId {
        DaoId(self.daos.keys().next_back().map_or(1, |d| d.0 + 1))
    }

    fn insert_dao(&mut self, record: DaoRecord) {
        self.by_key.insert((record.dao_name.clone(), record.chain_id), record.dao_id);
        self.daos.insert(record.dao_id, DaoEntry { record, runs: Vec::new() });
    }

    fn commit_run(&mut self, entry: RunEntry) -> Result<(), String> {
        let dao = self
            .daos
            .get_mut(&entry.run.dao_id)
            .ok_or_else(|| format!("run {} references unknown dao {}", entry.run.run_id, entry.run.dao_id))?;
        dao.runs.push(entry.run.run_id);
        self.runs.insert(entry.run.run_id, entry);
        Ok(())
    }

    /// Builds a read-only view from a static set of snapshot documents, one
    /// synthetic run per DAO. Any rejected document or duplicate DAO fails
    /// the whole bundle.
    pub fn from_documents(docs: impl IntoIterator<Item = (String, Vec<u8>)>) -> Result<CatalogView, CatalogError> {
        let mut parsed = Vec::new();
        for (source, bytes) in docs {
            let doc = SourceDocument::from_bytes(source.clone(), &bytes)
                .map_err(|e| CatalogError::InvalidBundle(format!("{source}: {e}")))?;
            parsed.push(doc);
        }
        parsed.sort_by(SourceDocument::import_order);
        let mut view = CatalogView::default();
        for c in parsed {
            let s = &c.parsed.snapshot;
            if view.dao_id(&s.dao_name, s.chain_id).is_some() {
                return Err(CatalogError::InvalidBundle(format!(
                    "DAO `{}` on chain {} appears more than once",
                    s.dao_name, s.chain_id
                )));
            }
            let dao_id = view.next_dao_id();
            view.insert_dao(DaoRecord { dao_id, dao_name: s.dao_name.clone(), chain_id: s.chain_id });
            let run_id = RunId(dao_id.0);
            let run = MetricRun {
                run_id,
                dao_id,
                dao_name: s.dao_name.clone(),
                chain_id: s.chain_id,
                timestamp: s.timestamp.clone(),
                created_at: s.timestamp.clone().unwrap_or_default(),
                source_path: c.path.clone(),
                content_digest: c.digest.clone(),
            };
            let blocks = c
                .parsed
                .blocks
                .iter()
                .map(|(kind, block)| MetricSnapshot {
                    run_id,
                    block_name: kind,
                    digest: block_digest(block).1,
                    payload: Arc::new(block.clone()),
                })
                .collect();
            view.commit_run(RunEntry { run, blocks }).map_err(CatalogError::InvalidBundle)?;
        }
        Ok(view)
    }
}

/// Loads a demo bundle: either a JSON array of snapshot documents or a
/// directory of snapshot files.
pub fn load_bundle(path: &Path) -> Result<CatalogView, CatalogError> {
    if path.is_dir() {
        let files = discover_json(path)?;
        let mut docs = Vec::with_capacity(files.len());
        for f in files {
            let bytes = fs::read(&f).map_err(io_err(&f))?;
            docs.push((f.display().to_string(), bytes));
        }
        return CatalogView::from_documents(docs);
    }
    let bytes = fs::read(path).map_err(io_err(path))?;
    let value: Value =
        serde_json::from_slice(&bytes).map_err(|e| CatalogError::InvalidBundle(format!("{}: {e}", path.display())))?;
    let items = value
        .as_array()
        .ok_or_else(|| CatalogError::InvalidBundle("bundle file must hold a JSON array of snapshots".into()))?;
    let source = path.display().to_string();
    CatalogView::from_documents(
        items
            .iter()
            .enumerate()
            .map(|(i, item)| (format!("{source}#{i}"), serde_json::to_vec(item).expect("re-serialise"))),
    )
}

/// Non-recursive, non-hidden `*.json` regular files, sorted by name.
pub fn discover_json(dir: &Path) -> Result<Vec<PathBuf>, CatalogError> {
    let unreadable = |source| CatalogError::DirectoryUnreadable { path: dir.to_path_buf(), source };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(unreadable)? {
        let entry = entry.map_err(unreadable)?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if name.starts_with('.') || !name.ends_with(".json") {
            continue;
        }
        if entry.file_type().map_err(unreadable)?.is_file() {
            files.push(entry.path());
        }
    }
    files.sort();
    Ok(files)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn block_digest(block: &Map<String, Value>) -> (Vec<u8>, String) {
    let bytes = serde_json::to_vec(block).expect("block serialises");
    let digest = sha256_hex(&bytes);
    (bytes, digest)
}

/// An accepted snapshot file, ready to be committed.
#[derive(Debug, Clone)]
pub struct SourceDocument {
    pub path: String,
    /// SHA-256 of the file bytes.
    pub digest: String,
    pub parsed: ParsedSnapshot,
}

impl SourceDocument {
    pub fn from_bytes(path: impl Into<String>, bytes: &[u8]) -> Result<Self, SnapshotError> {
        Ok(Self { path: path.into(), digest: sha256_hex(bytes), parsed: parse_snapshot(bytes)? })
    }

    /// Capture timestamp first, then file name.
    fn import_order(a: &SourceDocument, b: &SourceDocument) -> std::cmp::Ordering {
        let key = |c: &SourceDocument| {
            let ts = c.parsed.snapshot.timestamp.as_deref().and_then(parse_timestamp);
            (ts, c.path.clone())
        };
        key(a).cmp(&key(b))
    }

    fn dao_key(&self) -> (&str, u64) {
        (&self.parsed.snapshot.dao_name, self.parsed.snapshot.chain_id)
    }
}

/// The readable contents of a data directory.
#[derive(Debug, Clone, Default)]
pub struct SourceScan {
    /// Accepted documents in import order.
    pub accepted: Vec<SourceDocument>,
    pub rejected: Vec<FileReport>,
}

impl SourceScan {
    /// Reads and parses every snapshot file in `dir`.
    pub fn read_dir(dir: &Path) -> Result<SourceScan, CatalogError> {
        let mut scan = SourceScan::default();
        for path in discover_json(dir)? {
            let source = path.display().to_string();
            let bytes = match fs::read(&path) {
                Ok(b) => b,
                Err(e) => {
                    scan.rejected.push(rejected(
                        source,
                        None,
                        Issue {
                            severity: Severity::Error,
                            kind: IssueKind::Syntax,
                            field_path: String::new(),
                            message: format!("unreadable: {e}"),
                        },
                    ));
                    continue;
                }
            };
            match SourceDocument::from_bytes(source.clone(), &bytes) {
                Ok(doc) => scan.accepted.push(doc),
                Err(e) => scan.rejected.push(rejected(source, None, e.to_issue())),
            }
        }
        scan.accepted.sort_by(SourceDocument::import_order);
        Ok(scan)
    }

    /// The document each DAO ends up serving after an import: the last one
    /// in import order.
    pub fn latest_per_dao(&self) -> Vec<&SourceDocument> {
        let mut latest: Vec<&SourceDocument> = Vec::new();
        for doc in &self.accepted {
            match latest.iter_mut().find(|d| d.dao_key() == doc.dao_key()) {
                Some(slot) => *slot = doc,
                None => latest.push(doc),
            }
        }
        latest
    }
}

fn parse_timestamp(ts: &str) -> Option<chrono::NaiveDateTime> {
    chrono::DateTime::parse_from_rfc3339(ts)
        .map(|d| d.naive_utc())
        .ok()
        .or_else(|| chrono::NaiveDateTime::parse_from_str(ts, "%Y-%m-%dT%H:%M:%S%.f").ok())
        .or_else(|| chrono::NaiveDate::parse_from_str(ts, "%Y-%m-%d").ok().and_then(|d| d.and_hms_opt(0, 0, 0)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum FileOutcome {
    Imported { dao_id: DaoId, run_id: RunId },
    SkippedIdentical { dao_id: DaoId, run_id: RunId },
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileReport {
    pub path: String,
    pub dao_name: Option<String>,
    #[serde(flatten)]
    pub outcome: FileOutcome,
    pub issues: Vec<Issue>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImportSummary {
    pub files: Vec<FileReport>,
}

impl ImportSummary {
    fn count(&self, pred: impl Fn(&FileOutcome) -> bool) -> usize {
        self.files.iter().filter(|f| pred(&f.outcome)).count()
    }

    pub fn imported(&self) -> usize {
        self.count(|o| matches!(o, FileOutcome::Imported { .. }))
    }

    pub fn skipped(&self) -> usize {
        self.count(|o| matches!(o, FileOutcome::SkippedIdentical { .. }))
    }

    pub fn rejected(&self) -> usize {
        self.count(|o| matches!(o, FileOutcome::Rejected))
    }

    pub fn warnings(&self) -> usize {
        self.files.iter().flat_map(|f| &f.issues).filter(|i| i.severity == Severity::Warning).count()
    }
}

#[derive(Debug, Default)]
struct LogCursor {
    /// Byte offset just past the last complete line consumed.
    offset: u64,
    line: usize,
    next_run: u64,
    /// Runs whose records were read but whose commit has not been seen.
    staged: HashMap<RunId, RunEntry>,
}

/// The on-disk catalog: one writer, any number of readers.
#[derive(Debug)]
pub struct Catalog {
    dir: PathBuf,
    current: RwLock<Arc<CatalogView>>,
    cursor: Mutex<LogCursor>,
}

impl Catalog {
    /// Opens the catalog at `dir`, creating an empty one if needed.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, CatalogError> {
        let dir = dir.into();
        let log = dir.join(LOG_FILE);
        if !log.exists() {
            fs::create_dir_all(dir.join(BLOB_DIR)).map_err(io_err(&dir))?;
            let lock = Self::lock_dir(&dir)?;
            if !log.exists() {
                let mut f = File::create(&log).map_err(io_err(&log))?;
                writeln!(f, "{}", serde_json::json!({ "catalog_version": CATALOG_VERSION })).map_err(io_err(&log))?;
                f.sync_all().map_err(io_err(&log))?;
            }
            drop(lock);
        }
        Self::open_existing(dir)
    }

    /// Opens an existing catalog; fails if `dir` holds none.
    pub fn open_existing(dir: impl Into<PathBuf>) -> Result<Self, CatalogError> {
        let dir = dir.into();
        if !dir.join(LOG_FILE).is_file() {
            return Err(CatalogError::NotFound(dir));
        }
        let catalog = Self {
            dir,
            current: RwLock::new(Arc::new(CatalogView::default())),
            cursor: Mutex::new(LogCursor::default()),
        };
        catalog.refresh()?;
        Ok(catalog)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// The current committed state.
    pub fn view(&self) -> Arc<CatalogView> {
        self.current.read().expect("view lock poisoned").clone()
    }

    /// Replays records appended since the last read, e.g. by another process.
    /// Returns whether the view changed.
    pub fn refresh(&self) -> Result<bool, CatalogError> {
        let mut cursor = self.cursor.lock().expect("cursor lock poisoned");
        self.replay(&mut cursor)
    }

    fn replay(&self, cursor: &mut LogCursor) -> Result<bool, CatalogError> {
        let log_path = self.dir.join(LOG_FILE);
        let mut file = File::open(&log_path).map_err(io_err(&log_path))?;
        let len = file.metadata().map_err(io_err(&log_path))?.len();
        if len <= cursor.offset {
            return Ok(false);
        }
        file.seek(SeekFrom::Start(cursor.offset)).map_err(io_err(&log_path))?;
        let mut buf = Vec::with_capacity((len - cursor.offset) as usize);
        file.read_to_end(&mut buf).map_err(io_err(&log_path))?;
        let Some(last_newline) = buf.iter().rposition(|&b| b == b'\n') else {
            return Ok(false);
        };
        let complete = &buf[..=last_newline];

        let mut next = (*self.view()).clone();
        let mut changed = false;
        for raw_line in complete.split(|&b| b == b'\n') {
            if raw_line.is_empty() {
                continue;
            }
            cursor.line += 1;
            if cursor.line == 1 {
                let header: Value = serde_json::from_slice(raw_line)
                    .map_err(|e| CatalogError::CorruptLog { line: 1, message: e.to_string() })?;
                match header.get("catalog_version").and_then(Value::as_u64) {
                    Some(CATALOG_VERSION) => continue,
                    Some(v) => return Err(CatalogError::UnsupportedVersion(v)),
                    None => return Err(CatalogError::CorruptLog { line: 1, message: "missing catalog header".into() }),
                }
            }
            let record: LogRecord = match serde_json::from_slice(raw_line) {
                Ok(r) => r,
                Err(e) => {
                    // A torn append from a crashed writer; its run never commits.
                    tracing::warn!(line = cursor.line, error = %e, "skipping unreadable catalog record");
                    continue;
                }
            };
            match record {
                LogRecord::Dao(d) => {
                    next.insert_dao(d);
                    changed = true;
                }
                LogRecord::Run(run) => {
                    cursor.next_run = cursor.next_run.max(run.run_id.0 + 1);
                    cursor.staged.insert(run.run_id, RunEntry { run, blocks: Vec::new() });
                }
                LogRecord::Block { run_id, block_name, digest } => {
                    let payload = self.read_blob(&digest)?;
                    let entry = cursor.staged.get_mut(&run_id).ok_or_else(|| CatalogError::CorruptLog {
                        line: cursor.line,
                        message: format!("block for unknown run {run_id}"),
                    })?;
                    entry.blocks.push(MetricSnapshot { run_id, block_name, digest, payload: Arc::new(payload) });
                }
                LogRecord::Commit { run_id } => {
                    let mut entry = cursor.staged.remove(&run_id).ok_or_else(|| CatalogError::CorruptLog {
                        line: cursor.line,
                        message: format!("commit for unknown run {run_id}"),
                    })?;
                    entry.blocks.sort_by_key(|b| b.block_name);
                    next.commit_run(entry)
                        .map_err(|message| CatalogError::CorruptLog { line: cursor.line, message })?;
                    changed = true;
                }
            }
        }
        cursor.offset += complete.len() as u64;
        if changed {
            *self.current.write().expect("view lock poisoned") = Arc::new(next);
        }
        Ok(changed)
    }

    fn read_blob(&self, digest: &str) -> Result<Map<String, Value>, CatalogError> {
        let path = self.dir.join(BLOB_DIR).join(digest);
        let bytes =
            fs::read(&path).map_err(|e| CatalogError::Blob { digest: digest.into(), message: e.to_string() })?;
        serde_json::from_slice(&bytes).map_err(|e| CatalogError::Blob { digest: digest.into(), message: e.to_string() })
    }

    fn write_blob(&self, digest: &str, bytes: &[u8]) -> Result<(), CatalogError> {
        let path = self.dir.join(BLOB_DIR).join(digest);
        if path.exists() {
            return Ok(());
        }
        let tmp = self.dir.join(BLOB_DIR).join(format!(".{digest}.tmp"));
        let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(bytes).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))
    }

    /// Blobs whose bytes no longer hash to their name.
    pub fn verify_blobs(&self) -> Result<Vec<String>, CatalogError> {
        let dir = self.dir.join(BLOB_DIR);
        let mut bad = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let entry = entry.map_err(io_err(&dir))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.starts_with('.') {
                continue;
            }
            let bytes = fs::read(entry.path()).map_err(io_err(&entry.path()))?;
            if sha256_hex(&bytes) != name {
                bad.push(name);
            }
        }
        bad.sort();
        Ok(bad)
    }

    fn lock_dir(dir: &Path) -> Result<File, CatalogError> {
        let path = dir.join(LOCK_FILE);
        let f = OpenOptions::new().create(true).truncate(false).write(true).open(&path).map_err(io_err(&path))?;
        f.lock().map_err(io_err(&path))?;
        Ok(f)
    }

    /// Runs `f` as the single writer: holds the directory lock and the
    /// cursor, and first catches up with anything other writers appended.
    fn write_session<T>(
        &self,
        f: impl FnOnce(&mut WriteSession<'_>) -> Result<T, CatalogError>,
    ) -> Result<T, CatalogError> {
        let mut cursor = self.cursor.lock().expect("cursor lock poisoned");
        let _lock = Self::lock_dir(&self.dir)?;
        self.replay(&mut cursor)?;
        let mut session = WriteSession { catalog: self, cursor: &mut cursor };
        f(&mut session)
    }

    /// Imports every `*.json` file in `data_dir`. Per-file failures are
    /// reported in the summary and never abort the import.
    pub fn import_directory(&self, data_dir: &Path) -> Result<ImportSummary, CatalogError> {
        let scan = SourceScan::read_dir(data_dir)?;
        let mut summary = ImportSummary { files: scan.rejected };
        for f in &summary.files {
            tracing::warn!(path = %f.path, "snapshot rejected");
        }
        self.write_session(|session| {
            for doc in scan.accepted {
                let issues = doc.parsed.report.issues.clone();
                let dao_name = Some(doc.parsed.snapshot.dao_name.clone());
                let path = doc.path.clone();
                let outcome = session.commit(doc)?;
                summary.files.push(FileReport { path, dao_name, outcome, issues });
            }
            Ok(())
        })?;
        Ok(summary)
    }

    /// Imports one file as the new latest run of `dao_name`. A rejected file
    /// leaves the catalog untouched; byte-identical content returns the
    /// existing run.
    pub fn replace_snapshot(&self, dao_name: &str, path: &Path) -> Result<RunId, CatalogError> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        self.replace_snapshot_bytes(dao_name, &path.display().to_string(), &bytes)
    }

    pub fn replace_snapshot_bytes(&self, dao_name: &str, source: &str, bytes: &[u8]) -> Result<RunId, CatalogError> {
        let doc = SourceDocument::from_bytes(source, bytes)
            .map_err(|source_err| CatalogError::Rejected { path: PathBuf::from(source), source: source_err })?;
        if doc.parsed.snapshot.dao_name != dao_name.trim() {
            return Err(CatalogError::DaoMismatch {
                path: PathBuf::from(source),
                expected: dao_name.trim().to_string(),
                found: doc.parsed.snapshot.dao_name,
            });
        }
        match self.write_session(|s| s.commit(doc))? {
            FileOutcome::Imported { run_id, .. } | FileOutcome::SkippedIdentical { run_id, .. } => Ok(run_id),
            FileOutcome::Rejected => unreachable!("commit never rejects a parsed snapshot"),
        }
    }

    pub fn latest_snapshot(&self, dao_name: &str) -> Result<StoredSnapshot, CatalogError> {
        self.view().latest_snapshot(dao_name)
    }

    pub fn run_scoped_snapshot(&self, dao_name: &str, run_id: RunId) -> Result<StoredSnapshot, CatalogError> {
        self.view().run_scoped_snapshot(dao_name, run_id)
    }
}

fn rejected(path: String, dao_name: Option<String>, issue: Issue) -> FileReport {
    FileReport { path, dao_name, outcome: FileOutcome::Rejected, issues: vec![issue] }
}

struct WriteSession<'a> {
    catalog: &'a Catalog,
    cursor: &'a mut LogCursor,
}

impl WriteSession<'_> {
    fn commit(&mut self, c: SourceDocument) -> Result<FileOutcome, CatalogError> {
        let view = self.catalog.view();
        let s = &c.parsed.snapshot;
        let mut records = Vec::new();
        let dao_id = match view.dao_id(&s.dao_name, s.chain_id) {
            Some(id) => {
                if let Some(latest) = view.latest_run(id) {
                    if latest.content_digest == c.digest {
                        return Ok(FileOutcome::SkippedIdentical { dao_id: id, run_id: latest.run_id });
                    }
                }
                id
            }
            None => {
                let id = view.next_dao_id();
                records.push(LogRecord::Dao(DaoRecord {
                    dao_id: id,
                    dao_name: s.dao_name.clone(),
                    chain_id: s.chain_id,
                }));
                id
            }
        };
        let run_id = RunId(self.cursor.next_run.max(1));
        records.push(LogRecord::Run(MetricRun {
            run_id,
            dao_id,
            dao_name: s.dao_name.clone(),
            chain_id: s.chain_id,
            timestamp: s.timestamp.clone(),
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true),
            source_path: c.path.clone(),
            content_digest: c.digest.clone(),
        }));
        for (kind, block) in c.parsed.blocks.iter() {
            let (bytes, digest) = block_digest(block);
            self.catalog.write_blob(&digest, &bytes)?;
            records.push(LogRecord::Block { run_id, block_name: kind, digest });
        }
        records.push(LogRecord::Commit { run_id });
        self.append(&records)?;
        let changed = self.catalog.replay(self.cursor)?;
        debug_assert!(changed);
        Ok(FileOutcome::Imported { dao_id, run_id })
    }

    /// Appends all records with a single write, then syncs.
    fn append(&mut self, records: &[LogRecord]) -> Result<(), CatalogError> {
        let path = self.catalog.dir.join(LOG_FILE);
        let mut f = OpenOptions::new().append(true).read(true).open(&path).map_err(io_err(&path))?;
        let len = f.metadata().map_err(io_err(&path))?.len();
        let mut buf = Vec::new();
        if len > self.cursor.offset {
            // A previous writer died mid-line; terminate its fragment.
            let mut tail = Vec::new();
            f.seek(SeekFrom::Start(self.cursor.offset)).map_err(io_err(&path))?;
            f.read_to_end(&mut tail).map_err(io_err(&path))?;
            if tail.last() != Some(&b'\n') {
                buf.push(b'\n');
            }
        }
        for r in records {
            serde_json::to_writer(&mut buf, r).expect("record serialises");
            buf.push(b'\n');
        }
        f.write_all(&buf).map_err(io_err(&path))?;
        f.sync_data().map_err(io_err(&path))
    }
}
