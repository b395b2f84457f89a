use std::path::PathBuf;

use crate::toolkit::ToolRunResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by the CLI exit codes and HTTP status mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    NotFound,
    Integrity,
    Io,
    Unavailable,
    Internal,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{kind} {id} not found")]
    NotFound { kind: &'static str, id: u64 },

    #[error("integrity failure: {0}")]
    Integrity(String),

    #[error("corrupt record {}: {reason}", path.display())]
    Corruption { path: PathBuf, reason: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("store is closed")]
    Closed,

    #[error("id counter may not decrease (current {current}, requested {requested})")]
    CounterRegression { current: u64, requested: u64 },

    #[error("cannot decode case payload: {0}")]
    Decode(String),

    #[error("evidence file missing: {}", .0.display())]
    MissingEvidence(PathBuf),

    #[error("manifest error in `{field}`: {message}")]
    Manifest { field: String, message: String },

    #[error("platform error: {0}")]
    Platform(String),

    #[error("failed to launch tool `{tool_id}`: {reason}")]
    Launch {
        tool_id: String,
        reason: String,
        run: Box<ToolRunResult>,
    },

    #[error("tool `{tool_id}` timed out after {timeout_s} s")]
    Timeout {
        tool_id: String,
        timeout_s: u64,
        run: Box<ToolRunResult>,
    },

    #[error("unsupported report format `{requested}` (supported: {supported})")]
    UnsupportedFormat { requested: String, supported: String },

    #[error("report generation failed for evidence {evidence_id}: {reason}")]
    Generation { evidence_id: u64, reason: String },

    #[error("{0}")]
    Unavailable(String),

    #[error("LaTeX compilation failed:\n{log}")]
    Compile { log: String },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Validation(_)
            | Error::CounterRegression { .. }
            | Error::Manifest { .. }
            | Error::Platform(_)
            | Error::UnsupportedFormat { .. }
            | Error::Closed => ErrorClass::Validation,
            Error::NotFound { .. } => ErrorClass::NotFound,
            Error::Integrity(_)
            | Error::Corruption { .. }
            | Error::MissingEvidence(_)
            | Error::Decode(_) => ErrorClass::Integrity,
            Error::Io { .. } | Error::Generation { .. } => ErrorClass::Io,
            Error::Unavailable(_) => ErrorClass::Unavailable,
            Error::Launch { .. } | Error::Timeout { .. } | Error::Compile { .. } => {
                ErrorClass::Internal
            }
        }
    }

    /// Stable machine-readable code for API consumers.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::NotFound { .. } => "not_found",
            Error::Integrity(_) => "integrity",
            Error::Corruption { .. } => "corruption",
            Error::Io { .. } => "io",
            Error::Closed => "store_closed",
            Error::CounterRegression { .. } => "counter_regression",
            Error::Decode(_) => "decode",
            Error::MissingEvidence(_) => "missing_evidence",
            Error::Manifest { .. } => "manifest",
            Error::Platform(_) => "platform",
            Error::Launch { .. } => "launch_failed",
            Error::Timeout { .. } => "timeout",
            Error::UnsupportedFormat { .. } => "unsupported_format",
            Error::Generation { .. } => "generation",
            Error::Unavailable(_) => "unavailable",
            Error::Compile { .. } => "compile_failed",
        }
    }
}
