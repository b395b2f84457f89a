//! Read-only views of evidence bytes.
//!
//! Everything here is a pure function of its input, apart from
//! [`slice_evidence`] which reads (never writes) the evidence file. Nothing
//! in this module records custody; callers that show a view to a person log
//! the `viewed` event themselves.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{Read, Seek, SeekFrom};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::casework::{Casework, Evidence};
use crate::error::{Error, Result};

/// Largest window a single render request may cover.
pub const WINDOW_CAP: u64 = 1024 * 1024;

/// Window shown when no length is requested.
pub const DEFAULT_WINDOW: u64 = 4096;
pub const BYTES_PER_ROW: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderFormat {
    Hex,
    Ascii,
    Unicode,
}

impl RenderFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            RenderFormat::Hex => "hex",
            RenderFormat::Ascii => "ascii",
            RenderFormat::Unicode => "unicode",
        }
    }
}

impl FromStr for RenderFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hex" => Ok(RenderFormat::Hex),
            "ascii" => Ok(RenderFormat::Ascii),
            "unicode" => Ok(RenderFormat::Unicode),
            other => Err(Error::validation(format!(
                "unknown render format `{other}` (expected hex, ascii or unicode)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TextEncoding {
    #[serde(rename = "utf-8")]
    Utf8,
    #[serde(rename = "utf-16le")]
    Utf16Le,
    #[serde(rename = "utf-16be")]
    Utf16Be,
}

impl TextEncoding {
    pub fn as_str(self) -> &'static str {
        match self {
            TextEncoding::Utf8 => "utf-8",
            TextEncoding::Utf16Le => "utf-16le",
            TextEncoding::Utf16Be => "utf-16be",
        }
    }
}

impl FromStr for TextEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "utf-8" => Ok(TextEncoding::Utf8),
            "utf-16le" => Ok(TextEncoding::Utf16Le),
            "utf-16be" => Ok(TextEncoding::Utf16Be),
            other => Err(Error::validation(format!(
                "unsupported encoding `{other}` (expected utf-8, utf-16le or utf-16be)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderRequest {
    pub format: RenderFormat,
    pub offset: u64,
    pub length: u64,
    pub encoding: Option<TextEncoding>,
}

impl RenderRequest {
    pub fn new(format: RenderFormat, offset: u64, length: u64) -> Self {
        RenderRequest {
            format,
            offset,
            length,
            encoding: None,
        }
    }

    /// Window length used when a caller names no length: the rest of the
    /// file from `offset`, up to [`DEFAULT_WINDOW`] bytes.
    pub fn default_length(size: u64, offset: u64) -> u64 {
        size.saturating_sub(offset).min(DEFAULT_WINDOW)
    }

    /// Custody detail for a `viewed` event.
    pub fn describe(&self) -> String {
        let mut s = format!("format={} offset={} length={}", self.format.as_str(), self.offset, self.length);
        if let Some(enc) = self.encoding {
            s.push_str(" encoding=");
            s.push_str(enc.as_str());
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.length > WINDOW_CAP {
            return Err(Error::validation(format!(
                "render window of {} bytes exceeds the {WINDOW_CAP}-byte cap",
                self.length
            )));
        }
        if self.encoding.is_some() && self.format != RenderFormat::Unicode {
            return Err(Error::validation("an encoding applies only to the unicode format"));
        }
        Ok(())
    }
}

/// Reads `[offset, offset + length)` of an evidence file.
pub fn slice_evidence(work: &Casework, evidence: &Evidence, offset: u64, length: u64) -> Result<Vec<u8>> {
    slice_file(&work.evidence_path(evidence), evidence.size_bytes, offset, length)
}

pub fn slice_file(path: &Path, size: u64, offset: u64, length: u64) -> Result<Vec<u8>> {
    let end = offset
        .checked_add(length)
        .filter(|end| *end <= size)
        .ok_or_else(|| {
            Error::validation(format!(
                "range offset={offset} length={length} outside {size} bytes"
            ))
        })?;
    let mut file = File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingEvidence(path.to_path_buf())
        } else {
            Error::io(format!("cannot open {}", path.display()), e)
        }
    })?;
    let ctx = || format!("cannot read {}", path.display());
    file.seek(SeekFrom::Start(offset)).map_err(|e| Error::io(ctx(), e))?;
    let mut buf = Vec::with_capacity((end - offset) as usize);
    file.take(length)
        .read_to_end(&mut buf)
        .map_err(|e| Error::io(ctx(), e))?;
    if buf.len() as u64 != length {
        return Err(Error::Integrity(format!(
            "{} is shorter than its recorded size",
            path.display()
        )));
    }
    Ok(buf)
}

/// Slices and renders one window of an evidence.
pub fn render_evidence(work: &Casework, evidence: &Evidence, request: &RenderRequest) -> Result<String> {
    request.validate()?;
    let data = slice_evidence(work, evidence, request.offset, request.length)?;
    Ok(match request.format {
        RenderFormat::Hex => render_hex(&data, request.offset),
        RenderFormat::Ascii => render_ascii(&data),
        RenderFormat::Unicode => render_unicode(&data, request.encoding.unwrap_or(TextEncoding::Utf8)),
    })
}

fn gutter_char(b: u8) -> char {
    if (0x20..=0x7e).contains(&b) {
        b as char
    } else {
        '.'
    }
}

/// Canonical hex dump.
///
/// ```text
/// 00000000  41 42 43 44 45 46 47 48  49 4a 4b 4c 4d 4e 4f 50  |ABCDEFGHIJKLMNOP|
/// ```
///
/// Each row holds 16 bytes: an 8-digit offset, two spaces, two groups of
/// eight byte pairs separated by a double space, two spaces and the ASCII
/// gutter. A short last row is padded so its gutter lines up.
pub fn render_hex(data: &[u8], base_offset: u64) -> String {
    let rows = data.len().div_ceil(BYTES_PER_ROW);
    let mut out = String::with_capacity(rows * 78);
    for (i, row) in data.chunks(BYTES_PER_ROW).enumerate() {
        let offset = base_offset.wrapping_add((i * BYTES_PER_ROW) as u64);
        let _ = write!(out, "{offset:08x}  ");
        for col in 0..BYTES_PER_ROW {
            if col == 8 {
                out.push_str("  ");
            } else if col > 0 {
                out.push(' ');
            }
            match row.get(col) {
                Some(b) => {
                    let _ = write!(out, "{b:02x}");
                }
                None => out.push_str("  "),
            }
        }
        out.push_str("  |");
        out.extend(row.iter().map(|&b| gutter_char(b)));
        out.push_str("|\n");
    }
    out
}

/// Printable ASCII, newline and tab pass through; every other byte is `.`.
pub fn render_ascii(data: &[u8]) -> String {
    data.iter()
        .map(|&b| match b {
            b'\n' | b'\t' => b as char,
            b => gutter_char(b),
        })
        .collect()
}

/// Decodes text, substituting U+FFFD for invalid sequences.
pub fn render_unicode(data: &[u8], encoding: TextEncoding) -> String {
    match encoding {
        TextEncoding::Utf8 => String::from_utf8_lossy(data).into_owned(),
        TextEncoding::Utf16Le | TextEncoding::Utf16Be => {
            let pairs = data.chunks_exact(2);
            let dangling = !pairs.remainder().is_empty();
            let units = pairs.map(|p| match encoding {
                TextEncoding::Utf16Le => u16::from_le_bytes([p[0], p[1]]),
                _ => u16::from_be_bytes([p[0], p[1]]),
            });
            let mut out: String = char::decode_utf16(units)
                .map(|r| r.unwrap_or(char::REPLACEMENT_CHARACTER))
                .collect();
            if dangling {
                out.push(char::REPLACEMENT_CHARACTER);
            }
            out
        }
    }
}

/// Unicode render from a text label, rejecting unsupported encodings.
pub fn render_unicode_labeled(data: &[u8], encoding: &str) -> Result<String> {
    Ok(render_unicode(data, encoding.parse()?))
}
