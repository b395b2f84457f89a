//! Engine-independent persistence for serialized cases and the global id
//! counter.
//!
//! A [`Store`] binds exactly one [`StorageAdapter`]. Two adapters ship: an
//! in-memory map and a directory of record files. The file layout under the
//! data root is
//!
//! ```text
//! store/case_<id>.rec
//! store/id_count.rec
//! ```
//!
//! Every record file is a little-endian container: magic `FTK1`, `u16`
//! version, `u64` payload length, the payload, and the CRC-32 of the payload.
//! Writes go to `<name>.tmp` and are renamed into place, so a reader sees
//! either the previous record or the new one.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"FTK1";
pub const STORE_DIR: &str = "store";
pub const COUNTER_FILE: &str = "id_count.rec";
const COUNTER_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 8;
const TRAILER_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdapterKind {
    Memory,
    File,
}

impl std::str::FromStr for AdapterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "memory" => Ok(AdapterKind::Memory),
            "file" => Ok(AdapterKind::File),
            other => Err(Error::validation(format!(
                "unknown adapter `{other}` (expected memory or file)"
            ))),
        }
    }
}

/// One serialized case as the store sees it: an id and opaque bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseRecord {
    pub case_id: u64,
    pub payload: Vec<u8>,
    pub version: u16,
}

/// Backend hidden behind a [`Store`].
///
/// Implementations need not be internally synchronized; the store serializes
/// mutations and allows concurrent reads.
pub trait StorageAdapter: Send + Sync {
    fn put(&mut self, record: &CaseRecord) -> Result<()>;
    fn get(&self, case_id: u64) -> Result<Option<CaseRecord>>;
    fn case_ids(&self) -> Result<Vec<u64>>;
    fn read_counter(&self) -> Result<u64>;
    fn write_counter(&mut self, value: u64) -> Result<()>;
}

/// Handle to an open store. Shareable across threads.
pub struct Store {
    root: PathBuf,
    kind: AdapterKind,
    adapter: RwLock<Option<Box<dyn StorageAdapter>>>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("root", &self.root)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl Store {
    /// Opens (creating if needed) a store rooted at `root`.
    ///
    /// The memory adapter never touches the filesystem.
    pub fn open(root: impl Into<PathBuf>, kind: AdapterKind) -> Result<Self> {
        let root = root.into();
        let adapter: Box<dyn StorageAdapter> = match kind {
            AdapterKind::Memory => Box::new(MemoryAdapter::default()),
            AdapterKind::File => Box::new(FileAdapter::open(root.join(STORE_DIR))?),
        };
        Ok(Store {
            root,
            kind,
            adapter: RwLock::new(Some(adapter)),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn kind(&self) -> AdapterKind {
        self.kind
    }

    /// Releases the adapter. Every later call fails with [`Error::Closed`].
    pub fn close(&self) {
        *self.adapter.write().unwrap_or_else(|e| e.into_inner()) = None;
    }

    pub fn is_closed(&self) -> bool {
        self.adapter
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .is_none()
    }

    fn read<T>(&self, f: impl FnOnce(&dyn StorageAdapter) -> Result<T>) -> Result<T> {
        let guard = self.adapter.read().unwrap_or_else(|e| e.into_inner());
        match guard.as_deref() {
            Some(adapter) => f(adapter),
            None => Err(Error::Closed),
        }
    }

    fn write<T>(&self, f: impl FnOnce(&mut dyn StorageAdapter) -> Result<T>) -> Result<T> {
        let mut guard = self.adapter.write().unwrap_or_else(|e| e.into_inner());
        match guard.as_deref_mut() {
            Some(adapter) => f(adapter),
            None => Err(Error::Closed),
        }
    }

    pub fn put_case_record(&self, record: &CaseRecord) -> Result<()> {
        if record.case_id == 0 {
            return Err(Error::validation("case id must be positive"));
        }
        if record.version == 0 {
            return Err(Error::validation("record version must be at least 1"));
        }
        self.write(|a| a.put(record))
    }

    pub fn get_case_record(&self, case_id: u64) -> Result<CaseRecord> {
        if case_id == 0 {
            return Err(Error::validation("case id must be positive"));
        }
        self.read(|a| a.get(case_id))?
            .ok_or(Error::NotFound { kind: "case", id: case_id })
    }

    /// Ascending, duplicate-free.
    pub fn list_case_ids(&self) -> Result<Vec<u64>> {
        self.read(|a| a.case_ids())
    }

    pub fn read_id_counter(&self) -> Result<u64> {
        self.read(|a| a.read_counter())
    }

    pub fn write_id_counter(&self, value: u64) -> Result<()> {
        self.write(|a| {
            let current = a.read_counter()?;
            if value < current {
                return Err(Error::CounterRegression {
                    current,
                    requested: value,
                });
            }
            a.write_counter(value)
        })
    }

    /// Reads the counter, increments it, persists it and returns the new
    /// value, all under the writer lock.
    pub fn allocate_id(&self) -> Result<u64> {
        self.write(|a| {
            let next = a
                .read_counter()?
                .checked_add(1)
                .ok_or_else(|| Error::validation("id counter exhausted"))?;
            a.write_counter(next)?;
            Ok(next)
        })
    }
}

#[derive(Default)]
struct MemoryAdapter {
    records: BTreeMap<u64, CaseRecord>,
    counter: u64,
}

impl StorageAdapter for MemoryAdapter {
    fn put(&mut self, record: &CaseRecord) -> Result<()> {
        self.records.insert(record.case_id, record.clone());
        Ok(())
    }

    fn get(&self, case_id: u64) -> Result<Option<CaseRecord>> {
        Ok(self.records.get(&case_id).cloned())
    }

    fn case_ids(&self) -> Result<Vec<u64>> {
        Ok(self.records.keys().copied().collect())
    }

    fn read_counter(&self) -> Result<u64> {
        Ok(self.counter)
    }

    fn write_counter(&mut self, value: u64) -> Result<()> {
        self.counter = value;
        Ok(())
    }
}

struct FileAdapter {
    dir: PathBuf,
    counter: u64,
}

impl FileAdapter {
    fn open(dir: PathBuf) -> Result<Self> {
        fs::create_dir_all(&dir)
            .map_err(|e| Error::io(format!("cannot create store directory {}", dir.display()), e))?;
        // Leftovers from an interrupted write; the committed record is intact.
        if let Ok(entries) = fs::read_dir(&dir) {
            for entry in entries.flatten() {
                if entry.path().extension().is_some_and(|ext| ext == "tmp") {
                    let _ = fs::remove_file(entry.path());
                }
            }
        }
        let counter_path = dir.join(COUNTER_FILE);
        let counter = if counter_path.exists() {
            decode_counter(&counter_path, &read_file(&counter_path)?)?
        } else {
            write_atomic(
                &counter_path,
                &encode_container(COUNTER_VERSION, &0u64.to_le_bytes()),
            )?;
            0
        };
        Ok(FileAdapter { dir, counter })
    }

    fn case_path(&self, case_id: u64) -> PathBuf {
        self.dir.join(format!("case_{case_id}.rec"))
    }
}

impl StorageAdapter for FileAdapter {
    fn put(&mut self, record: &CaseRecord) -> Result<()> {
        write_atomic(
            &self.case_path(record.case_id),
            &encode_container(record.version, &record.payload),
        )
    }

    fn get(&self, case_id: u64) -> Result<Option<CaseRecord>> {
        let path = self.case_path(case_id);
        let bytes = match fs::read(&path) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(format!("cannot read {}", path.display()), e)),
        };
        let (version, payload) = decode_container(&bytes).map_err(|reason| Error::Corruption {
            path: path.clone(),
            reason,
        })?;
        Ok(Some(CaseRecord {
            case_id,
            payload: payload.to_vec(),
            version,
        }))
    }

    fn case_ids(&self) -> Result<Vec<u64>> {
        let entries = fs::read_dir(&self.dir)
            .map_err(|e| Error::io(format!("cannot list {}", self.dir.display()), e))?;
        let mut ids = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io("cannot list store", e))?;
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Some(id) = name
                .strip_prefix("case_")
                .and_then(|rest| rest.strip_suffix(".rec"))
                .and_then(|digits| digits.parse::<u64>().ok())
            {
                ids.push(id);
            }
        }
        ids.sort_unstable();
        ids.dedup();
        Ok(ids)
    }

    fn read_counter(&self) -> Result<u64> {
        Ok(self.counter)
    }

    fn write_counter(&mut self, value: u64) -> Result<()> {
        write_atomic(
            &self.dir.join(COUNTER_FILE),
            &encode_container(COUNTER_VERSION, &value.to_le_bytes()),
        )?;
        self.counter = value;
        Ok(())
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(format!("cannot read {}", path.display()), e))
}

fn decode_counter(path: &Path, bytes: &[u8]) -> Result<u64> {
    let corrupt = |reason: String| Error::Corruption {
        path: path.to_path_buf(),
        reason,
    };
    let (_, payload) = decode_container(bytes).map_err(corrupt)?;
    let raw: [u8; 8] = payload
        .try_into()
        .map_err(|_| corrupt(format!("counter payload is {} bytes, expected 8", payload.len())))?;
    Ok(u64::from_le_bytes(raw))
}

/// Wraps a payload in the record container.
pub fn encode_container(version: u16, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + TRAILER_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&version.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
    out.extend_from_slice(&crc32fast::hash(payload).to_le_bytes());
    out
}

/// Validates a record container and returns `(version, payload)`.
pub fn decode_container(bytes: &[u8]) -> std::result::Result<(u16, &[u8]), String> {
    if bytes.len() < HEADER_LEN + TRAILER_LEN {
        return Err(format!("record is {} bytes, shorter than the header", bytes.len()));
    }
    if &bytes[..4] != MAGIC {
        return Err("bad magic".into());
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    let len = u64::from_le_bytes(bytes[6..14].try_into().expect("8 bytes"));
    let body = &bytes[HEADER_LEN..];
    let expected = len
        .checked_add(TRAILER_LEN as u64)
        .ok_or_else(|| "payload length overflows".to_string())?;
    if body.len() as u64 != expected {
        return Err(format!(
            "declared payload length {len} does not match record size {}",
            bytes.len()
        ));
    }
    let (payload, crc) = body.split_at(len as usize);
    let stored = u32::from_le_bytes(crc.try_into().expect("4 bytes"));
    let actual = crc32fast::hash(payload);
    if stored != actual {
        return Err(format!("checksum mismatch (stored {stored:08x}, computed {actual:08x})"));
    }
    Ok((version, payload))
}

/// Writes `<path>.tmp`, syncs it, then renames over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let ctx = |what: &str| format!("cannot {what} {}", tmp.display());
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(ctx("create"), e))?;
    file.write_all(bytes).map_err(|e| Error::io(ctx("write"), e))?;
    file.sync_all().map_err(|e| Error::io(ctx("sync"), e))?;
    drop(file);
    fs::rename(&tmp, path)
        .map_err(|e| Error::io(format!("cannot commit {}", path.display()), e))?;
    if let Some(parent) = path.parent() {
        if let Ok(dir) = fs::File::open(parent) {
            let _ = dir.sync_all();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: u64, payload: &[u8]) -> CaseRecord {
        CaseRecord {
            case_id: id,
            payload: payload.to_vec(),
            version: 1,
        }
    }

    #[test]
    fn fresh_file_store_has_zero_counter_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path(), AdapterKind::File).unwrap();
        assert_eq!(store.read_id_counter().unwrap(), 0);
        let bytes = fs::read(dir.path().join(STORE_DIR).join(COUNTER_FILE)).unwrap();
        let (version, payload) = decode_container(&bytes).unwrap();
        assert_eq!(version, 1);
        assert_eq!(payload, 0u64.to_le_bytes());
    }

    #[test]
    fn memory_store_touches_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("data");
        let store = Store::open(&root, AdapterKind::Memory).unwrap();
        store.put_case_record(&rec(1, b"x")).unwrap();
        store.write_id_counter(5).unwrap();
        assert!(!root.exists());
    }

    #[test]
    fn overwrite_and_listing() {
        for kind in [AdapterKind::Memory, AdapterKind::File] {
            let dir = tempfile::tempdir().unwrap();
            let store = Store::open(dir.path(), kind).unwrap();
            assert_eq!(store.list_case_ids().unwrap(), Vec::<u64>::new());
            assert!(matches!(
                store.get_case_record(7),
                Err(Error::NotFound { kind: "case", id: 7 })
            ));
            for id in [3, 1, 2] {
                store.put_case_record(&rec(id, b"a")).unwrap();
            }
            store.put_case_record(&rec(2, b"b2")).unwrap();
            assert_eq!(store.list_case_ids().unwrap(), vec![1, 2, 3]);
            assert_eq!(store.get_case_record(2).unwrap().payload, b"b2");
        }
    }

    #[test]
    fn counter_is_monotone_and_persistent() {
        let dir = tempfile::tempdir().unwrap();
        {
            let store = Store::open(dir.path(), AdapterKind::File).unwrap();
            store.write_id_counter(41).unwrap();
            assert_eq!(store.read_id_counter().unwrap(), 41);
            assert!(matches!(
                store.write_id_counter(40),
                Err(Error::CounterRegression { current: 41, requested: 40 })
            ));
            store.write_id_counter(41).unwrap();
        }
        let store = Store::open(dir.path(), AdapterKind::File).unwrap();
        assert_eq!(store.read_id_counter().unwrap(), 41);
        assert_eq!(store.allocate_id().unwrap(), 42);
    }

    #[test]
    fn truncated_record_is_corruption_naming_file() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path(), AdapterKind::File).unwrap();
        store.put_case_record(&rec(4, b"hello world")).unwrap();
        let path = dir.path().join(STORE_DIR).join("case_4.rec");
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        match store.get_case_record(4) {
            Err(Error::Corruption { path: p, .. }) => assert_eq!(p, path),
            other => panic!("expected corruption, got {other:?}"),
        }
    }

    #[test]
    fn flipped_payload_byte_fails_checksum() {
        let mut bytes = encode_container(1, b"payload");
        bytes[HEADER_LEN] ^= 0x01;
        assert!(decode_container(&bytes).unwrap_err().contains("checksum"));
    }

    #[test]
    fn corrupt_counter_fails_open() {
        let dir = tempfile::tempdir().unwrap();
        drop(Store::open(dir.path(), AdapterKind::File).unwrap());
        let path = dir.path().join(STORE_DIR).join(COUNTER_FILE);
        fs::write(&path, b"garbage").unwrap();
        match Store::open(dir.path(), AdapterKind::File) {
            Err(Error::Corruption { path: p, .. }) => assert_eq!(p, path),
            other => panic!("expected corruption, got {other:?}"),
        }
    }

    #[test]
    fn stale_tmp_does_not_shadow_committed_record() {
        let dir = tempfile::tempdir().unwrap();
        {
            let store = Store::open(dir.path(), AdapterKind::File).unwrap();
            store.put_case_record(&rec(1, b"old")).unwrap();
        }
        // A crash after writing the temp file but before the rename.
        let tmp = dir.path().join(STORE_DIR).join("case_1.rec.tmp");
        fs::write(&tmp, encode_container(1, b"new-but-uncommitted")).unwrap();
        let store = Store::open(dir.path(), AdapterKind::File).unwrap();
        assert_eq!(store.get_case_record(1).unwrap().payload, b"old");
        assert_eq!(store.list_case_ids().unwrap(), vec![1]);
        assert!(!tmp.exists());
    }

    #[test]
    fn closed_handle_is_a_usage_error() {
        let store = Store::open("unused", AdapterKind::Memory).unwrap();
        store.close();
        assert!(matches!(store.list_case_ids(), Err(Error::Closed)));
        assert!(matches!(store.put_case_record(&rec(1, b"")), Err(Error::Closed)));
    }

    #[test]
    fn unwritable_root_is_an_open_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain-file");
        fs::write(&file, b"").unwrap();
        assert!(matches!(
            Store::open(&file, AdapterKind::File),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn rejects_zero_id() {
        let store = Store::open("unused", AdapterKind::Memory).unwrap();
        assert!(matches!(store.put_case_record(&rec(0, b"")), Err(Error::Validation(_))));
    }
}
