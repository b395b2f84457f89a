use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::time::TimestampMs;

pub const MAX_DETAIL_CHARS: usize = 1024;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontMatter {
    #[serde(default)]
    pub executive_summary: String,
    #[serde(default)]
    pub introduction: String,
    #[serde(default)]
    pub conclusion: String,
}

/// Root investigation record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub id: u64,
    pub title: String,
    pub created_at: TimestampMs,
    pub investigator: String,
    pub evidences: Vec<Evidence>,
    pub front_matter: FrontMatter,
}

impl Case {
    pub fn evidence(&self, id: u64) -> Option<&Evidence> {
        self.evidences.iter().find(|e| e.id == id)
    }

    pub fn evidence_mut(&mut self, id: u64) -> Option<&mut Evidence> {
        self.evidences.iter_mut().find(|e| e.id == id)
    }
}

/// A file under management. Its bytes never change after it is created.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub id: u64,
    pub case_id: u64,
    pub original_name: String,
    /// Relative to the data root, e.g. `3/7_disk.img`.
    pub managed_path: PathBuf,
    pub size_bytes: u64,
    pub hash_algorithm: String,
    pub reference_hash: String,
    pub imported_at: TimestampMs,
    pub parent_evidence_id: Option<u64>,
    pub notes: Vec<Note>,
    pub custody: Vec<CustodyEvent>,
}

impl Evidence {
    /// Appends a custody event and returns it.
    ///
    /// Sequence numbers continue from the last event and the timestamp is
    /// clamped so it never precedes the previous one. Details longer than
    /// [`MAX_DETAIL_CHARS`] are cut.
    pub(crate) fn append_custody(
        &mut self,
        principal: &str,
        operation: Operation,
        detail: impl Into<String>,
        now: TimestampMs,
    ) -> CustodyEvent {
        let (seq, timestamp) = match self.custody.last() {
            Some(last) => (last.seq + 1, now.max(last.timestamp)),
            None => (1, now),
        };
        let event = CustodyEvent {
            seq,
            principal: principal.to_string(),
            timestamp,
            operation,
            detail: truncate_chars(detail.into(), MAX_DETAIL_CHARS),
        };
        self.custody.push(event.clone());
        event
    }

    pub fn region_in_bounds(&self, region: Region) -> bool {
        region.length >= 1
            && region
                .offset
                .checked_add(region.length)
                .is_some_and(|end| end <= self.size_bytes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub offset: u64,
    pub length: u64,
}

impl Region {
    pub fn overlaps(&self, other: &Region) -> bool {
        self.offset < other.offset.saturating_add(other.length)
            && other.offset < self.offset.saturating_add(self.length)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Note {
    pub id: u64,
    pub author: String,
    pub created_at: TimestampMs,
    pub text: String,
    pub region: Option<Region>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    Imported,
    Verified,
    Viewed,
    Extracted,
    Duplicated,
    NoteAdded,
    ToolRun,
    ExportedToReport,
}

impl Operation {
    pub const ALL: [Operation; 8] = [
        Operation::Imported,
        Operation::Verified,
        Operation::Viewed,
        Operation::Extracted,
        Operation::Duplicated,
        Operation::NoteAdded,
        Operation::ToolRun,
        Operation::ExportedToReport,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Operation::Imported => "imported",
            Operation::Verified => "verified",
            Operation::Viewed => "viewed",
            Operation::Extracted => "extracted",
            Operation::Duplicated => "duplicated",
            Operation::NoteAdded => "note_added",
            Operation::ToolRun => "tool_run",
            Operation::ExportedToReport => "exported_to_report",
        }
    }

    pub(crate) fn code(self) -> u8 {
        Operation::ALL
            .iter()
            .position(|op| *op == self)
            .expect("listed") as u8
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Operation::ALL.get(code as usize).copied()
    }

    /// Operations that may open a custody list.
    pub fn is_origin(self) -> bool {
        matches!(
            self,
            Operation::Imported | Operation::Extracted | Operation::Duplicated
        )
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Operation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Operation::ALL
            .into_iter()
            .find(|op| op.as_str() == s)
            .ok_or_else(|| Error::validation(format!("unknown custody operation `{s}`")))
    }
}

/// One immutable chain-of-custody entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustodyEvent {
    pub seq: u64,
    pub principal: String,
    pub timestamp: TimestampMs,
    pub operation: Operation,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub ok: bool,
    pub expected_hash: String,
    pub actual_hash: String,
    pub checked_at: TimestampMs,
}

impl VerificationResult {
    pub fn new(expected_hash: String, actual_hash: String, checked_at: TimestampMs) -> Self {
        VerificationResult {
            ok: expected_hash == actual_hash,
            expected_hash,
            actual_hash,
            checked_at,
        }
    }

    /// Custody detail text for this outcome.
    pub fn detail(&self) -> String {
        if self.ok {
            "ok".to_string()
        } else {
            format!(
                "MISMATCH expected={} actual={}",
                self.expected_hash, self.actual_hash
            )
        }
    }
}

pub(crate) fn truncate_chars(mut s: String, max: usize) -> String {
    if let Some((idx, _)) = s.char_indices().nth(max) {
        s.truncate(idx);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blank_evidence(size: u64) -> Evidence {
        Evidence {
            id: 2,
            case_id: 1,
            original_name: "x".into(),
            managed_path: "1/2_x".into(),
            size_bytes: size,
            hash_algorithm: "sha256".into(),
            reference_hash: String::new(),
            imported_at: 0,
            parent_evidence_id: None,
            notes: vec![],
            custody: vec![],
        }
    }

    #[test]
    fn custody_seq_and_clamped_time() {
        let mut e = blank_evidence(1);
        e.append_custody("a", Operation::Imported, "src", 100);
        let second = e.append_custody("a", Operation::Verified, "ok", 50);
        assert_eq!(second.seq, 2);
        assert_eq!(second.timestamp, 100);
    }

    #[test]
    fn long_detail_is_cut_on_char_boundary() {
        let mut e = blank_evidence(1);
        let ev = e.append_custody("a", Operation::Imported, "é".repeat(2000), 0);
        assert_eq!(ev.detail.chars().count(), MAX_DETAIL_CHARS);
    }

    #[test]
    fn region_bounds() {
        let e = blank_evidence(7);
        assert!(e.region_in_bounds(Region { offset: 0, length: 7 }));
        assert!(!e.region_in_bounds(Region { offset: 7, length: 1 }));
        assert!(!e.region_in_bounds(Region { offset: 0, length: 0 }));
        assert!(!e.region_in_bounds(Region { offset: u64::MAX, length: 2 }));
    }

    #[test]
    fn operation_codes_round_trip() {
        for op in Operation::ALL {
            assert_eq!(Operation::from_code(op.code()), Some(op));
            assert_eq!(op.as_str().parse::<Operation>().unwrap(), op);
        }
        assert_eq!(Operation::from_code(8), None);
    }
}
