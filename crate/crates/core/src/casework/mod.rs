//! Cases, evidence and the chain of custody.
//!
//! [`Casework`] is the single entry point for every mutation. Each mutating
//! call takes the per-case writer lock, loads the case from the store, applies
//! the change, appends the custody event(s) and persists the case before the
//! lock is released. Evidence files are only ever created, never modified.

mod codec;
pub mod digest;
mod model;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

pub use codec::{deserialize_case, serialize_case, FORMAT_VERSION};
pub use model::{
    Case, CustodyEvent, Evidence, FrontMatter, Note, Operation, Region, VerificationResult,
    MAX_DETAIL_CHARS,
};

use crate::datastore::{AdapterKind, CaseRecord, Store};
use crate::error::{Error, Result};
use crate::time::{now_ms, TimestampMs};
use digest::{copy_hashing, digest_file, HASH_ALGORITHM};

pub struct Casework {
    store: Store,
    case_locks: Mutex<HashMap<u64, Arc<Mutex<()>>>>,
    evidence_index: RwLock<HashMap<u64, u64>>,
}

impl std::fmt::Debug for Casework {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Casework").field("store", &self.store).finish_non_exhaustive()
    }
}

/// Replaces path separators and control characters with `_`.
pub fn sanitize_name(name: &str) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| match c {
            '/' | '\\' => '_',
            c if c.is_control() => '_',
            c => c,
        })
        .collect();
    if cleaned.is_empty() {
        "evidence".to_string()
    } else {
        cleaned
    }
}

/// Name given to an extracted region when the caller supplies none.
pub fn default_extract_name(original: &str, offset: u64, length: u64) -> String {
    format!("{original}@{offset}+{length}")
}

/// Name given to a duplicate when the caller supplies none.
pub fn default_duplicate_name(original: &str) -> String {
    format!("copy of {original}")
}

impl Casework {
    /// Opens the store under `data_root` and indexes every case in it.
    ///
    /// A corrupt case record fails the open.
    pub fn open(data_root: impl Into<PathBuf>, kind: AdapterKind) -> Result<Self> {
        Self::with_store(Store::open(data_root, kind)?)
    }

    pub fn with_store(store: Store) -> Result<Self> {
        let work = Casework {
            store,
            case_locks: Mutex::new(HashMap::new()),
            evidence_index: RwLock::new(HashMap::new()),
        };
        let mut index = HashMap::new();
        for case in work.cases()? {
            for e in &case.evidences {
                index.insert(e.id, case.id);
            }
        }
        *work.evidence_index.write().unwrap() = index;
        Ok(work)
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn data_root(&self) -> &Path {
        self.store.root()
    }

    pub fn case_dir(&self, case_id: u64) -> PathBuf {
        self.data_root().join(case_id.to_string())
    }

    /// Absolute (data-root-joined) path of an evidence file.
    pub fn evidence_path(&self, evidence: &Evidence) -> PathBuf {
        self.data_root().join(&evidence.managed_path)
    }

    pub fn close(&self) {
        self.store.close();
    }

    /// Next id from the store-wide counter. Shared by cases, evidence and notes.
    pub fn allocate_id(&self) -> Result<u64> {
        self.store.allocate_id()
    }

    pub fn create_case(&self, title: &str, investigator: &str) -> Result<Case> {
        let title = title.trim();
        if title.is_empty() {
            return Err(Error::validation("case title must not be empty"));
        }
        let id = self.allocate_id()?;
        let dir = self.case_dir(id);
        fs::create_dir_all(&dir)
            .map_err(|e| Error::io(format!("cannot create case directory {}", dir.display()), e))?;
        let case = Case {
            id,
            title: title.to_string(),
            created_at: now_ms(),
            investigator: investigator.to_string(),
            evidences: Vec::new(),
            front_matter: FrontMatter::default(),
        };
        let lock = self.case_lock(id);
        let _guard = lock.lock().unwrap();
        self.persist(&case)?;
        Ok(case)
    }

    pub fn case(&self, case_id: u64) -> Result<Case> {
        let record = self.store.get_case_record(case_id)?;
        if record.version != u16::from(FORMAT_VERSION) {
            return Err(Error::Decode(format!(
                "case {case_id} stored with unsupported version {}",
                record.version
            )));
        }
        deserialize_case(&record.payload)
    }

    pub fn list_case_ids(&self) -> Result<Vec<u64>> {
        self.store.list_case_ids()
    }

    pub fn cases(&self) -> Result<Vec<Case>> {
        self.list_case_ids()?
            .into_iter()
            .map(|id| self.case(id))
            .collect()
    }

    pub fn case_of_evidence(&self, evidence_id: u64) -> Result<u64> {
        self.evidence_index
            .read()
            .unwrap()
            .get(&evidence_id)
            .copied()
            .ok_or(Error::NotFound {
                kind: "evidence",
                id: evidence_id,
            })
    }

    pub fn evidence(&self, evidence_id: u64) -> Result<Evidence> {
        let case = self.case(self.case_of_evidence(evidence_id)?)?;
        case.evidence(evidence_id).cloned().ok_or(Error::NotFound {
            kind: "evidence",
            id: evidence_id,
        })
    }

    pub fn set_front_matter(&self, case_id: u64, front_matter: FrontMatter) -> Result<Case> {
        self.with_case_mut(case_id, |case| {
            case.front_matter = front_matter;
            Ok(case.clone())
        })
    }

    /// Imports `source` into `case_id` under its own file name.
    pub fn import_evidence(&self, case_id: u64, source: &Path, principal: &str) -> Result<Evidence> {
        let name = source
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        self.import_evidence_as(case_id, source, &name, principal)
    }

    /// Imports `source` into `case_id`, recording `original_name`.
    ///
    /// The copy is hashed while written and the source is hashed again
    /// afterwards. Nothing is committed unless the two digests agree.
    pub fn import_evidence_as(
        &self,
        case_id: u64,
        source: &Path,
        original_name: &str,
        principal: &str,
    ) -> Result<Evidence> {
        let label = source.display().to_string();
        self.import_evidence_labeled(case_id, source, original_name, &label, principal)
    }

    /// Like [`Casework::import_evidence_as`] but records `source_label`
    /// instead of the path read from, e.g. for uploads staged in a temp file.
    pub fn import_evidence_labeled(
        &self,
        case_id: u64,
        source: &Path,
        original_name: &str,
        source_label: &str,
        principal: &str,
    ) -> Result<Evidence> {
        let detail = format!("source={source_label}");
        self.import_file(case_id, source, original_name, principal, None, detail)
    }

    pub(crate) fn import_file(
        &self,
        case_id: u64,
        source: &Path,
        original_name: &str,
        principal: &str,
        parent: Option<u64>,
        detail: String,
    ) -> Result<Evidence> {
        // Fail before allocating when the case is unknown.
        self.case(case_id)?;
        let meta = fs::metadata(source)
            .map_err(|e| Error::io(format!("cannot read {}", source.display()), e))?;
        if !meta.is_file() {
            return Err(Error::validation(format!(
                "{} is not a regular file",
                source.display()
            )));
        }
        let id = self.allocate_id()?;
        let (managed, tmp) = self.new_managed_path(case_id, id, original_name)?;
        let abs_tmp = self.data_root().join(&tmp);
        let (copy_hash, size) = match copy_hashing(source, 0, None, &abs_tmp) {
            Ok(v) => v,
            Err(e) => {
                let _ = fs::remove_file(&abs_tmp);
                return Err(Error::io(format!("cannot copy {}", source.display()), e));
            }
        };
        let (source_hash, _) = match digest_file(source) {
            Ok(v) => v,
            Err(e) => {
                let _ = fs::remove_file(&abs_tmp);
                return Err(Error::io(format!("cannot re-read {}", source.display()), e));
            }
        };
        if source_hash != copy_hash {
            let _ = fs::remove_file(&abs_tmp);
            return Err(Error::Integrity(format!(
                "copy of {} does not match its source (source {source_hash}, copy {copy_hash})",
                source.display()
            )));
        }
        let now = now_ms();
        let mut evidence = Evidence {
            id,
            case_id,
            original_name: original_name.to_string(),
            managed_path: managed,
            size_bytes: size,
            hash_algorithm: HASH_ALGORITHM.to_string(),
            reference_hash: copy_hash,
            imported_at: now,
            parent_evidence_id: parent,
            notes: Vec::new(),
            custody: Vec::new(),
        };
        evidence.append_custody(principal, Operation::Imported, detail, now);
        self.commit_new_evidence(evidence, &abs_tmp, |_| Ok(()))
    }

    /// Recomputes the digest of the managed file and records a `verified`
    /// event. A mismatch is a successful call with `ok == false`.
    pub fn verify_evidence(&self, evidence_id: u64, principal: &str) -> Result<VerificationResult> {
        let case_id = self.case_of_evidence(evidence_id)?;
        // The inner result is persisted either way: a missing file still
        // leaves a `verified` event behind.
        self.with_case_mut(case_id, |case| {
            let evidence = case.evidence_mut(evidence_id).expect("indexed");
            match self.check_digest(evidence) {
                Ok(result) => {
                    evidence.append_custody(
                        principal,
                        Operation::Verified,
                        result.detail(),
                        result.checked_at,
                    );
                    Ok(Ok(result))
                }
                Err(e @ Error::MissingEvidence(_)) => {
                    evidence.append_custody(principal, Operation::Verified, "file missing", now_ms());
                    Ok(Err(e))
                }
                Err(e) => Err(e),
            }
        })?
    }

    /// Digest check without a custody event, used as a precondition by
    /// other operations and for post-run tool verification.
    pub fn check_digest(&self, evidence: &Evidence) -> Result<VerificationResult> {
        let path = self.evidence_path(evidence);
        let (actual, _) = digest_file(&path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingEvidence(path.clone())
            } else {
                Error::io(format!("cannot read {}", path.display()), e)
            }
        })?;
        Ok(VerificationResult::new(
            evidence.reference_hash.clone(),
            actual,
            now_ms(),
        ))
    }

    /// Copies bytes `[offset, offset + length)` of an evidence into a new
    /// child evidence of the same case.
    pub fn extract_region(
        &self,
        evidence_id: u64,
        offset: u64,
        length: u64,
        new_name: &str,
        principal: &str,
    ) -> Result<Evidence> {
        let source = self.evidence(evidence_id)?;
        if !source.region_in_bounds(Region { offset, length }) {
            return Err(Error::validation(format!(
                "region offset={offset} length={length} outside evidence {evidence_id} of {} bytes",
                source.size_bytes
            )));
        }
        self.derive_child(
            &source,
            offset,
            length,
            new_name,
            principal,
            Operation::Extracted,
            |child| format!("offset={offset} length={length} child={child}"),
            format!("from evidence {evidence_id} offset={offset} length={length}"),
        )
    }

    /// Full byte-exact copy of an evidence under a new name.
    pub fn duplicate_evidence(
        &self,
        evidence_id: u64,
        new_name: &str,
        principal: &str,
    ) -> Result<Evidence> {
        let source = self.evidence(evidence_id)?;
        let size = source.size_bytes;
        self.derive_child(
            &source,
            0,
            size,
            new_name,
            principal,
            Operation::Duplicated,
            |child| format!("child={child}"),
            format!("from evidence {evidence_id}"),
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn derive_child(
        &self,
        source: &Evidence,
        offset: u64,
        length: u64,
        new_name: &str,
        principal: &str,
        operation: Operation,
        source_detail: impl FnOnce(u64) -> String,
        child_detail: String,
    ) -> Result<Evidence> {
        if new_name.trim().is_empty() {
            return Err(Error::validation("new evidence name must not be empty"));
        }
        let check = self.check_digest(source)?;
        if !check.ok {
            return Err(Error::Integrity(format!(
                "evidence {} failed verification: {}",
                source.id,
                check.detail()
            )));
        }
        let case_id = source.case_id;
        let id = self.allocate_id()?;
        let (managed, tmp) = self.new_managed_path(case_id, id, new_name)?;
        let abs_tmp = self.data_root().join(&tmp);
        let src_path = self.evidence_path(source);
        let (hash, written) = copy_hashing(&src_path, offset, Some(length), &abs_tmp).map_err(|e| {
            let _ = fs::remove_file(&abs_tmp);
            Error::io(format!("cannot copy from {}", src_path.display()), e)
        })?;
        if written != length {
            let _ = fs::remove_file(&abs_tmp);
            return Err(Error::Integrity(format!(
                "evidence {} yielded {written} bytes, expected {length}",
                source.id
            )));
        }
        let now = now_ms();
        let mut child = Evidence {
            id,
            case_id,
            original_name: new_name.to_string(),
            managed_path: managed,
            size_bytes: length,
            hash_algorithm: HASH_ALGORITHM.to_string(),
            reference_hash: hash,
            imported_at: now,
            parent_evidence_id: Some(source.id),
            notes: Vec::new(),
            custody: Vec::new(),
        };
        child.append_custody(principal, operation, child_detail, now);
        let source_id = source.id;
        let detail = source_detail(id);
        self.commit_new_evidence(child, &abs_tmp, move |case| {
            let parent = case
                .evidence_mut(source_id)
                .ok_or(Error::NotFound { kind: "evidence", id: source_id })?;
            parent.append_custody(principal, operation, detail, now);
            Ok(())
        })
    }

    pub fn add_note(
        &self,
        evidence_id: u64,
        author: &str,
        text: &str,
        region: Option<Region>,
    ) -> Result<Note> {
        if text.trim().is_empty() {
            return Err(Error::validation("note text must not be empty"));
        }
        let case_id = self.case_of_evidence(evidence_id)?;
        let size = self.evidence(evidence_id)?.size_bytes;
        if let Some(r) = region {
            let ok = r.length >= 1 && r.offset.checked_add(r.length).is_some_and(|end| end <= size);
            if !ok {
                return Err(Error::validation(format!(
                    "note region offset={} length={} outside evidence of {size} bytes",
                    r.offset, r.length
                )));
            }
        }
        let id = self.allocate_id()?;
        self.with_case_mut(case_id, |case| {
            let evidence = case.evidence_mut(evidence_id).expect("indexed");
            let now = now_ms();
            let note = Note {
                id,
                author: author.to_string(),
                created_at: now,
                text: text.to_string(),
                region,
            };
            let detail = match region {
                Some(r) => format!("note={id} region={}+{}", r.offset, r.length),
                None => format!("note={id}"),
            };
            evidence.notes.push(note.clone());
            evidence.append_custody(author, Operation::NoteAdded, detail, now);
            Ok(note)
        })
    }

    pub fn list_custody(&self, evidence_id: u64) -> Result<Vec<CustodyEvent>> {
        Ok(self.evidence(evidence_id)?.custody)
    }

    /// Appends one custody event to an evidence.
    ///
    /// Used by layers that perform the operation themselves (viewing, tool
    /// runs, report export).
    pub fn record_event(
        &self,
        evidence_id: u64,
        principal: &str,
        operation: Operation,
        detail: impl Into<String>,
    ) -> Result<CustodyEvent> {
        if operation.is_origin() {
            return Err(Error::validation(format!(
                "`{operation}` events are recorded by their own operation"
            )));
        }
        let case_id = self.case_of_evidence(evidence_id)?;
        let detail = detail.into();
        self.with_case_mut(case_id, |case| {
            let evidence = case.evidence_mut(evidence_id).expect("indexed");
            Ok(evidence.append_custody(principal, operation, detail, now_ms()))
        })
    }

    /// Appends one event to each listed evidence of a case under a single
    /// lock, all or nothing.
    pub fn record_events(
        &self,
        case_id: u64,
        evidence_ids: &[u64],
        principal: &str,
        operation: Operation,
        detail: &str,
    ) -> Result<Case> {
        if operation.is_origin() {
            return Err(Error::validation(format!(
                "`{operation}` events are recorded by their own operation"
            )));
        }
        self.with_case_mut(case_id, |case| {
            let now: TimestampMs = now_ms();
            for id in evidence_ids {
                case.evidence_mut(*id)
                    .ok_or(Error::NotFound { kind: "evidence", id: *id })?
                    .append_custody(principal, operation, detail, now);
            }
            Ok(case.clone())
        })
    }

    fn new_managed_path(&self, case_id: u64, evidence_id: u64, name: &str) -> Result<(PathBuf, PathBuf)> {
        let dir = self.case_dir(case_id);
        fs::create_dir_all(&dir)
            .map_err(|e| Error::io(format!("cannot create {}", dir.display()), e))?;
        let file = format!("{evidence_id}_{}", sanitize_name(name));
        let managed = PathBuf::from(case_id.to_string()).join(&file);
        let tmp = PathBuf::from(case_id.to_string()).join(format!(".{file}.partial"));
        Ok((managed, tmp))
    }

    /// Renames the staged file into place and adds `evidence` to its case,
    /// letting `also` touch other evidence in the same transaction.
    fn commit_new_evidence(
        &self,
        evidence: Evidence,
        staged: &Path,
        also: impl FnOnce(&mut Case) -> Result<()>,
    ) -> Result<Evidence> {
        let final_path = self.evidence_path(&evidence);
        let mut renamed = false;
        let result = self.with_case_mut(evidence.case_id, |case| {
            if case.evidence(evidence.id).is_some() {
                return Err(Error::Integrity(format!("evidence id {} reused", evidence.id)));
            }
            also(case)?;
            fs::rename(staged, &final_path)
                .map_err(|e| Error::io(format!("cannot commit {}", final_path.display()), e))?;
            renamed = true;
            case.evidences.push(evidence.clone());
            Ok(())
        });
        if let Err(e) = result {
            let _ = fs::remove_file(if renamed { &final_path } else { staged });
            return Err(e);
        }
        self.evidence_index
            .write()
            .unwrap()
            .insert(evidence.id, evidence.case_id);
        Ok(evidence)
    }

    fn case_lock(&self, case_id: u64) -> Arc<Mutex<()>> {
        self.case_locks
            .lock()
            .unwrap()
            .entry(case_id)
            .or_default()
            .clone()
    }

    fn with_case_mut<T>(&self, case_id: u64, f: impl FnOnce(&mut Case) -> Result<T>) -> Result<T> {
        let lock = self.case_lock(case_id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut case = self.case(case_id)?;
        let out = f(&mut case)?;
        self.persist(&case)?;
        Ok(out)
    }

    fn persist(&self, case: &Case) -> Result<()> {
        self.store.put_case_record(&CaseRecord {
            case_id: case.id,
            payload: serialize_case(case),
            version: u16::from(FORMAT_VERSION),
        })
    }
}
