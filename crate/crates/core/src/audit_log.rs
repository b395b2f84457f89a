//! Application operations log.
//!
//! Lines have the form `[ 2026-10-16T08:30:00.123Z ]: message`. When the
//! sink echoes to the console, the same line is written to standard error,
//! so every component that logs through the sink is mirrored on the terminal
//! without redirecting the process streams.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::time::{iso8601, now_ms, TimestampMs};

pub const DEFAULT_LOG_NAME: &str = "ftklipse.application.log";

#[derive(Debug)]
pub struct LogSink {
    path: PathBuf,
    echo_console: bool,
    state: Mutex<SinkState>,
}

#[derive(Debug)]
struct SinkState {
    file: File,
    last_ts: TimestampMs,
}

impl LogSink {
    /// Opens `path` for appending, creating it if absent.
    pub fn open(path: impl Into<PathBuf>, echo_console: bool) -> Result<Self> {
        let path = path.into();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(format!("cannot open log {}", path.display()), e))?;
        Ok(LogSink {
            path,
            echo_console,
            state: Mutex::new(SinkState {
                file,
                last_ts: TimestampMs::MIN,
            }),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends one line. Embedded newlines are stored as the two characters
    /// `\n` so a message never spans lines.
    pub fn log(&self, message: &str) -> Result<()> {
        let mut state = self.state.lock().unwrap_or_else(|e| e.into_inner());
        let ts = now_ms().max(state.last_ts);
        let line = format_line(ts, message);
        state
            .file
            .write_all(line.as_bytes())
            .map_err(|e| Error::io(format!("cannot write log {}", self.path.display()), e))?;
        state.last_ts = ts;
        if self.echo_console {
            let _ = std::io::stderr().lock().write_all(line.as_bytes());
        }
        Ok(())
    }
}

pub fn format_line(ts: TimestampMs, message: &str) -> String {
    let escaped = message.replace('\r', "\\r").replace('\n', "\\n");
    format!("[ {} ]: {escaped}\n", iso8601(ts))
}
