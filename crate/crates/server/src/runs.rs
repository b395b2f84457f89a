//! Tool runs in flight and finished, pollable by id.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use ftklipse_core::toolkit::ToolRunResult;
use ftklipse_core::Error;
use serde::Serialize;

use crate::error::ErrorBody;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Finished,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub run_id: u64,
    pub tool_id: String,
    pub evidence_id: u64,
    pub status: RunStatus,
    pub result: Option<ToolRunResult>,
    pub error: Option<ErrorBody>,
}

#[derive(Debug, Default)]
pub struct RunTable {
    next: AtomicU64,
    runs: Mutex<HashMap<u64, RunRecord>>,
}

impl RunTable {
    pub fn start(&self, tool_id: &str, evidence_id: u64) -> RunRecord {
        let run_id = self.next.fetch_add(1, Ordering::Relaxed) + 1;
        let record = RunRecord {
            run_id,
            tool_id: tool_id.to_string(),
            evidence_id,
            status: RunStatus::Running,
            result: None,
            error: None,
        };
        self.lock().insert(run_id, record.clone());
        record
    }

    pub fn finish(&self, run_id: u64, outcome: Result<ToolRunResult, Error>) {
        let (status, result, error) = match outcome {
            Ok(r) => (RunStatus::Finished, Some(r), None),
            Err(e) => {
                let body = ErrorBody {
                    code: e.code().to_string(),
                    message: e.to_string(),
                };
                let run = match e {
                    Error::Launch { run, .. } | Error::Timeout { run, .. } => Some(*run),
                    _ => None,
                };
                (RunStatus::Failed, run, Some(body))
            }
        };
        if let Some(rec) = self.lock().get_mut(&run_id) {
            rec.status = status;
            rec.result = result;
            rec.error = error;
        }
    }

    pub fn get(&self, run_id: u64) -> Option<RunRecord> {
        self.lock().get(&run_id).cloned()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<u64, RunRecord>> {
        self.runs.lock().unwrap_or_else(|e| e.into_inner())
    }
}
