use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::manifest::{parse_manifest, Platform, ToolManifest, ToolType};
use crate::error::{Error, Result};

pub const MANIFEST_EXTENSION: &str = "tool";

/// A manifest that was skipped during a directory scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanDiagnostic {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Default, Clone)]
pub struct ScanReport {
    pub manifests: Vec<ToolManifest>,
    pub diagnostics: Vec<ScanDiagnostic>,
}

/// Parses every `*.tool` file in `dir` in file-name order.
///
/// Bad manifests and repeated ids are reported and skipped; the first
/// manifest to claim an id keeps it. A missing directory yields an empty
/// report with one diagnostic.
pub fn scan_tool_dir(dir: &Path) -> ScanReport {
    let mut report = ScanReport::default();
    let entries = match fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) => {
            report.diagnostics.push(ScanDiagnostic {
                path: dir.to_path_buf(),
                message: format!("tool directory unavailable: {e}"),
            });
            return report;
        }
    };
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == MANIFEST_EXTENSION) && p.is_file())
        .collect();
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));

    for path in paths {
        let parsed = fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|text| parse_manifest(&text).map_err(|e| e.to_string()));
        match parsed {
            Ok(m) if report.manifests.iter().any(|seen| seen.id == m.id) => {
                report.diagnostics.push(ScanDiagnostic {
                    message: format!("duplicate tool id `{}` ignored", m.id),
                    path,
                });
            }
            Ok(m) => report.manifests.push(m),
            Err(message) => report.diagnostics.push(ScanDiagnostic { path, message }),
        }
    }
    report
}

/// Conjunction of optional predicates over manifests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolFilter {
    pub tool_type: Option<ToolType>,
    pub platform: Option<Platform>,
    pub in_batch_menu: Option<bool>,
    pub in_right_click_menu: Option<bool>,
}

impl ToolFilter {
    pub fn matches(&self, m: &ToolManifest) -> bool {
        self.tool_type.is_none_or(|t| t == m.tool_type)
            && self.platform.is_none_or(|p| p == m.platform)
            && self.in_batch_menu.is_none_or(|b| b == m.in_batch_menu)
            && self.in_right_click_menu.is_none_or(|b| b == m.in_right_click_menu)
    }
}

/// Tools by id. Built once at startup and read-only afterwards.
#[derive(Debug, Clone, Default)]
pub struct ToolRegistry {
    tools: BTreeMap<String, ToolManifest>,
}

impl ToolRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_manifests(manifests: impl IntoIterator<Item = ToolManifest>) -> Result<Self> {
        let mut reg = ToolRegistry::new();
        for m in manifests {
            reg.register(m)?;
        }
        Ok(reg)
    }

    /// Scans `dir` and registers everything that parsed.
    pub fn load_dir(dir: &Path) -> (Self, Vec<ScanDiagnostic>) {
        let report = scan_tool_dir(dir);
        let reg = ToolRegistry::from_manifests(report.manifests)
            .expect("scan already removed duplicate ids");
        (reg, report.diagnostics)
    }

    pub fn register(&mut self, manifest: ToolManifest) -> Result<()> {
        if self.tools.contains_key(&manifest.id) {
            return Err(Error::Manifest {
                field: "id".into(),
                message: format!("tool `{}` already registered", manifest.id),
            });
        }
        self.tools.insert(manifest.id.clone(), manifest);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&ToolManifest> {
        self.tools.get(id)
    }

    pub fn len(&self) -> usize {
        self.tools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tools.is_empty()
    }

    /// Matching tools ordered by friendly name, then id.
    pub fn list(&self, filter: &ToolFilter) -> Vec<&ToolManifest> {
        let mut out: Vec<&ToolManifest> = self.tools.values().filter(|m| filter.matches(m)).collect();
        out.sort_by(|a, b| (&a.friendly_name, &a.id).cmp(&(&b.friendly_name, &b.id)));
        out
    }
}
