//! Canonical binary encoding of a [`Case`].
//!
//! A leading format-version byte, then every field in declaration order.
//! Integers are fixed-width little-endian, text is a `u32` byte length
//! followed by UTF-8, lists are a `u32` count followed by the elements and
//! options are a `0`/`1` tag byte followed by the value when present.
//! Equal cases always encode to equal bytes.

use std::path::PathBuf;

use super::model::{Case, CustodyEvent, Evidence, FrontMatter, Note, Operation, Region};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u8 = 1;

pub fn serialize_case(case: &Case) -> Vec<u8> {
    let mut enc = Encoder::default();
    enc.u8(FORMAT_VERSION);
    enc.u64(case.id);
    enc.str(&case.title);
    enc.i64(case.created_at);
    enc.str(&case.investigator);
    enc.list(&case.evidences, Encoder::evidence);
    enc.str(&case.front_matter.executive_summary);
    enc.str(&case.front_matter.introduction);
    enc.str(&case.front_matter.conclusion);
    enc.buf
}

pub fn deserialize_case(bytes: &[u8]) -> Result<Case> {
    let mut dec = Decoder { bytes, pos: 0 };
    let version = dec.u8()?;
    if version != FORMAT_VERSION {
        return Err(Error::Decode(format!("unsupported case format version {version}")));
    }
    let case = Case {
        id: dec.u64()?,
        title: dec.string()?,
        created_at: dec.i64()?,
        investigator: dec.string()?,
        evidences: dec.list(Decoder::evidence)?,
        front_matter: FrontMatter {
            executive_summary: dec.string()?,
            introduction: dec.string()?,
            conclusion: dec.string()?,
        },
    };
    if dec.pos != bytes.len() {
        return Err(Error::Decode(format!(
            "{} trailing bytes after case",
            bytes.len() - dec.pos
        )));
    }
    Ok(case)
}

#[derive(Default)]
struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn i64(&mut self, v: i64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u32(u32::try_from(s.len()).expect("text field exceeds 4 GiB"));
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn opt_u64(&mut self, v: Option<u64>) {
        match v {
            Some(v) => {
                self.u8(1);
                self.u64(v);
            }
            None => self.u8(0),
        }
    }

    fn list<T>(&mut self, items: &[T], mut each: impl FnMut(&mut Self, &T)) {
        self.u32(u32::try_from(items.len()).expect("list exceeds u32 elements"));
        for item in items {
            each(self, item);
        }
    }

    fn evidence(&mut self, e: &Evidence) {
        self.u64(e.id);
        self.u64(e.case_id);
        self.str(&e.original_name);
        self.str(&e.managed_path.to_string_lossy());
        self.u64(e.size_bytes);
        self.str(&e.hash_algorithm);
        self.str(&e.reference_hash);
        self.i64(e.imported_at);
        self.opt_u64(e.parent_evidence_id);
        self.list(&e.notes, Encoder::note);
        self.list(&e.custody, Encoder::custody);
    }

    fn note(&mut self, n: &Note) {
        self.u64(n.id);
        self.str(&n.author);
        self.i64(n.created_at);
        self.str(&n.text);
        match n.region {
            Some(r) => {
                self.u8(1);
                self.u64(r.offset);
                self.u64(r.length);
            }
            None => self.u8(0),
        }
    }

    fn custody(&mut self, c: &CustodyEvent) {
        self.u64(c.seq);
        self.str(&c.principal);
        self.i64(c.timestamp);
        self.u8(c.operation.code());
        self.str(&c.detail);
    }
}

struct Decoder<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|end| *end <= self.bytes.len())
            .ok_or_else(|| {
                Error::Decode(format!("payload truncated at byte {} (wanted {n})", self.pos))
            })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("exact length"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.array()?))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec())
            .map_err(|_| Error::Decode(format!("invalid UTF-8 in text ending at byte {}", self.pos)))
    }

    fn tag(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::Decode(format!("invalid option tag {other}"))),
        }
    }

    fn list<T>(&mut self, mut each: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        let count = self.u32()? as usize;
        // Every element takes at least one byte; refuse counts the payload cannot hold.
        if count > self.bytes.len() - self.pos {
            return Err(Error::Decode(format!("list count {count} exceeds payload")));
        }
        (0..count).map(|_| each(self)).collect()
    }

    fn evidence(&mut self) -> Result<Evidence> {
        Ok(Evidence {
            id: self.u64()?,
            case_id: self.u64()?,
            original_name: self.string()?,
            managed_path: PathBuf::from(self.string()?),
            size_bytes: self.u64()?,
            hash_algorithm: self.string()?,
            reference_hash: self.string()?,
            imported_at: self.i64()?,
            parent_evidence_id: if self.tag()? { Some(self.u64()?) } else { None },
            notes: self.list(Decoder::note)?,
            custody: self.list(Decoder::custody)?,
        })
    }

    fn note(&mut self) -> Result<Note> {
        Ok(Note {
            id: self.u64()?,
            author: self.string()?,
            created_at: self.i64()?,
            text: self.string()?,
            region: if self.tag()? {
                Some(Region {
                    offset: self.u64()?,
                    length: self.u64()?,
                })
            } else {
                None
            },
        })
    }

    fn custody(&mut self) -> Result<CustodyEvent> {
        Ok(CustodyEvent {
            seq: self.u64()?,
            principal: self.string()?,
            timestamp: self.i64()?,
            operation: {
                let code = self.u8()?;
                Operation::from_code(code)
                    .ok_or_else(|| Error::Decode(format!("unknown operation code {code}")))?
            },
            detail: self.string()?,
        })
    }
}
