//! Oracles and fixtures shared by integration tests. The oracles never use
//! the engine's own hashing, slicing or hex code.
#![allow(dead_code)]

pub mod doc;
pub mod ops;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::{Rng, RngCore};

/// Digest from the system `sha256sum`, or `None` when it is not installed.
pub fn sha256sum(path: &Path) -> Option<String> {
    let out = Command::new("sha256sum").arg(path).output().ok()?;
    if !out.status.success() {
        return None;
    }
    let text = String::from_utf8(out.stdout).ok()?;
    Some(text.split_whitespace().next()?.to_string())
}

pub fn have_sha256sum() -> bool {
    Command::new("sha256sum")
        .arg("--version")
        .output()
        .is_ok_and(|o| o.status.success())
}

/// Bytes `[offset, offset + len)` of a file read with plain std calls.
pub fn read_slice(path: &Path, offset: u64, len: u64) -> Vec<u8> {
    let all = fs::read(path).unwrap();
    all[offset as usize..(offset + len) as usize].to_vec()
}

/// Matches one canonical hex row without its newline.
pub const HEX_ROW: &str = r"^[0-9a-f]{8}  ((?:[0-9a-f]{2}| {2})(?: (?:[0-9a-f]{2}| {2})){7})  ((?:[0-9a-f]{2}| {2})(?: (?:[0-9a-f]{2}| {2})){7})  \|[\x20-\x7e]{1,16}\|$";

/// Independent parser for the canonical hex layout.
///
/// Returns the bytes and checks row offsets, column alignment and that the
/// gutter agrees with the hex columns. Panics on any deviation.
pub fn parse_hex_dump(text: &str, base: u64) -> Vec<u8> {
    let mut out = Vec::new();
    for (i, line) in text.split_terminator('\n').enumerate() {
        let offset = u64::from_str_radix(&line[..8], 16).expect("offset");
        assert_eq!(offset, base + (i as u64) * 16, "row {i} offset");
        assert_eq!(&line[8..10], "  ");
        let bar = line.find('|').expect("gutter");
        assert_eq!(bar, 60, "gutter column in row {i}");
        let cols = &line[10..58];
        assert_eq!(&line[58..60], "  ");
        let mut row = Vec::new();
        for c in 0..16 {
            let start = c * 3 + usize::from(c >= 8);
            let pair = &cols[start..start + 2];
            if pair == "  " {
                continue;
            }
            assert!(
                row.len() == c,
                "row {i}: byte after padding at column {c}"
            );
            row.push(u8::from_str_radix(pair, 16).expect("hex pair"));
        }
        let gutter = &line[bar + 1..line.len() - 1];
        assert!(line.ends_with('|'));
        let expect: String = row
            .iter()
            .map(|&b| if (0x20..0x7f).contains(&b) { b as char } else { '.' })
            .collect();
        assert_eq!(gutter, expect, "gutter of row {i}");
        out.extend(row);
    }
    out
}

pub fn random_bytes(rng: &mut impl Rng, len: usize) -> Vec<u8> {
    let mut buf = vec![0u8; len];
    rng.fill_bytes(&mut buf);
    buf
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, bytes).unwrap();
    p
}

/// Fixture tool scripts and manifests. Scripts run through `/bin/sh` so
/// they never need to be executable.
pub struct FixtureTools {
    pub dir: PathBuf,
}

pub const FIXTURE_IDS: [&str; 5] = ["echo", "fail", "sleep", "extract-head", "missing"];

impl FixtureTools {
    pub fn create(dir: &Path) -> FixtureTools {
        fs::create_dir_all(dir).unwrap();
        let script = |name: &str, body: &str| -> String {
            let p = dir.join(name);
            fs::write(&p, format!("#!/bin/sh\n{body}\n")).unwrap();
            p.to_string_lossy().into_owned()
        };
        let echo = script("echo.sh", "printf 'bytes=%s\\n' \"$(wc -c < \"$1\" | tr -d ' ')\"");
        let fail = script("fail.sh", "echo \"cannot parse $1\" >&2\nexit 3");
        let sleep = script("sleep.sh", "sleep 30\necho late");
        let head = script("head.sh", "head -c \"$2\" \"$1\" > \"$3\"");
        let manifests = [
            (
                "echo.tool",
                format!(
                    "id = echo\nname = Echo\nfriendly_name = Echo size\ncommand = /bin/sh {echo} {{evidence_path}}\n\
                     type = analysis\nplatform = unix\nin_right_click_menu = true\n"
                ),
            ),
            (
                "fail.tool",
                format!("id = fail\ncommand = /bin/sh {fail} {{evidence_path}}\nplatform = unix\nin_batch_menu = true\n"),
            ),
            (
                "sleep.tool",
                format!("id = sleep\ncommand = /bin/sh {sleep}\ntype = collection\nplatform = unix\n"),
            ),
            (
                "extract-head.tool",
                format!(
                    "id = extract-head\nname = Head\ncommand = /bin/sh {head} {{evidence_path}} {{param:count}} {{output_path}}\n\
                     output_file = head_{{evidence_id}}.bin\nparam = count|Byte count|text|8\n\
                     type = analysis\nplatform = unix\nin_right_click_menu = true\nin_batch_menu = true\n"
                ),
            ),
            (
                "missing.tool",
                "id = missing\ncommand = /nonexistent/ftk-no-such-tool {evidence_path}\nplatform = unix\n".to_string(),
            ),
        ];
        for (name, text) in manifests {
            fs::write(dir.join(name), text).unwrap();
        }
        FixtureTools { dir: dir.to_path_buf() }
    }
}

/// RNG seeded from `FTK_TEST_SEED` when set. The seed is printed for replay.
pub fn seeded_rng(label: &str) -> rand::rngs::StdRng {
    use rand::SeedableRng;
    let seed = std::env::var("FTK_TEST_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| rand::rng().next_u64());
    eprintln!("{label}: seed {seed}");
    rand::rngs::StdRng::seed_from_u64(seed)
}
