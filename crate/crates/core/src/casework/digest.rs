//! Streaming SHA-256 over files and file ranges.

use std::fs::File;
use std::io::{self, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

pub const HASH_ALGORITHM: &str = "sha256";
pub const DIGEST_HEX_LEN: usize = 64;

const CHUNK: usize = 64 * 1024;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Returns `(hex digest, byte count)` of everything readable from `reader`.
pub fn digest_reader(mut reader: impl Read) -> io::Result<(String, u64)> {
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; CHUNK];
    let mut total = 0u64;
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        total += n as u64;
    }
    Ok((hex::encode(hasher.finalize()), total))
}

pub fn digest_file(path: &Path) -> io::Result<(String, u64)> {
    digest_reader(File::open(path)?)
}

/// Copies `length` bytes starting at `offset` (or everything from `offset`
/// when `length` is `None`) from `src` into a new file at `dst`, hashing the
/// bytes as they pass. Returns `(hex digest, bytes written)`.
pub fn copy_hashing(
    src: &Path,
    offset: u64,
    length: Option<u64>,
    dst: &Path,
) -> io::Result<(String, u64)> {
    let mut input = File::open(src)?;
    input.seek(SeekFrom::Start(offset))?;
    let mut reader: Box<dyn Read> = match length {
        Some(len) => Box::new(input.take(len)),
        None => Box::new(input),
    };
    let mut out = BufWriter::new(File::create(dst)?);
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; CHUNK];
    let mut total = 0u64;
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        out.write_all(&buf[..n])?;
        total += n as u64;
    }
    let file = out.into_inner().map_err(|e| e.into_error())?;
    file.sync_all()?;
    Ok((hex::encode(hasher.finalize()), total))
}
