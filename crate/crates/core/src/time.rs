//! UTC millisecond timestamps.

use chrono::{DateTime, SecondsFormat, Utc};

/// Milliseconds since the Unix epoch, UTC.
pub type TimestampMs = i64;

pub fn now_ms() -> TimestampMs {
    Utc::now().timestamp_millis()
}

/// `2026-10-16T08:30:00.123Z`
pub fn iso8601(ts: TimestampMs) -> String {
    match DateTime::<Utc>::from_timestamp_millis(ts) {
        Some(dt) => dt.to_rfc3339_opts(SecondsFormat::Millis, true),
        None => format!("invalid-timestamp({ts})"),
    }
}

/// Compact form used in file names: `20261016T083000123Z`.
pub fn file_stamp(ts: TimestampMs) -> String {
    match DateTime::<Utc>::from_timestamp_millis(ts) {
        Some(dt) => dt.format("%Y%m%dT%H%M%S%3fZ").to_string(),
        None => format!("ts{ts}"),
    }
}
