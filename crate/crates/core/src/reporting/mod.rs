//! Case reports.
//!
//! A [`ReportSpec`] selects what goes into a report. Building one validates
//! the selection against the case and records an `exported_to_report` event
//! on every included evidence. A [`ReportGenerator`] then turns a spec plus a
//! case snapshot into a document. Output is deterministic: the only
//! timestamp used is the one stored in the spec.
//!
//! Document order: title block, executive summary, introduction, one section
//! per evidence (metadata, excerpts as hex dumps, notes, chain of custody),
//! conclusion.

mod escape;
mod html;
mod latex;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

pub use escape::{escape_html, escape_latex, latex_paragraphs};
pub use html::HtmlGenerator;
pub use latex::LatexGenerator;

use crate::casework::{Case, Casework, CustodyEvent, Evidence, FrontMatter, Note, Operation, Region};
use crate::error::{Error, Result};
use crate::rendering::{render_hex, slice_file, WINDOW_CAP};
use crate::time::{file_stamp, iso8601, now_ms, TimestampMs};

pub const REPORTS_DIR: &str = "reports";
pub const DEFAULT_LATEX_BIN: &str = "pdflatex";
const LATEX_TIMEOUT: Duration = Duration::from_secs(180);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excerpt {
    pub evidence_id: u64,
    pub offset: u64,
    pub length: u64,
    #[serde(default)]
    pub caption: String,
}

impl Excerpt {
    pub fn region(&self) -> Region {
        Region {
            offset: self.offset,
            length: self.length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportSpec {
    pub case_id: u64,
    pub title: String,
    pub front_matter: FrontMatter,
    pub include_evidence_ids: Vec<u64>,
    pub excerpts: Vec<Excerpt>,
    pub include_notes: bool,
    pub include_custody: bool,
    pub generated_at: TimestampMs,
}

/// What the investigator picked for a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportSelection {
    #[serde(default)]
    pub title: Option<String>,
    /// `None` selects every evidence in the case.
    #[serde(default)]
    pub evidence_ids: Option<Vec<u64>>,
    #[serde(default)]
    pub excerpts: Vec<Excerpt>,
    #[serde(default = "yes")]
    pub include_notes: bool,
    #[serde(default = "yes")]
    pub include_custody: bool,
}

fn yes() -> bool {
    true
}

impl Default for ReportSelection {
    fn default() -> Self {
        ReportSelection {
            title: None,
            evidence_ids: None,
            excerpts: Vec::new(),
            include_notes: true,
            include_custody: true,
        }
    }
}

/// Checks a spec against a case snapshot.
pub fn validate_spec(spec: &ReportSpec, case: &Case) -> Result<()> {
    if spec.case_id != case.id {
        return Err(Error::validation(format!(
            "report spec is for case {} but case {} was given",
            spec.case_id, case.id
        )));
    }
    for id in &spec.include_evidence_ids {
        if case.evidence(*id).is_none() {
            return Err(Error::validation(format!("evidence {id} is not in case {}", case.id)));
        }
    }
    for ex in &spec.excerpts {
        if !spec.include_evidence_ids.contains(&ex.evidence_id) {
            return Err(Error::validation(format!(
                "excerpt refers to evidence {} which is not included in the report",
                ex.evidence_id
            )));
        }
        let evidence = case.evidence(ex.evidence_id).expect("checked above");
        if !evidence.region_in_bounds(ex.region()) {
            return Err(Error::validation(format!(
                "excerpt offset={} length={} outside evidence {} of {} bytes",
                ex.offset, ex.length, ex.evidence_id, evidence.size_bytes
            )));
        }
        if ex.length > WINDOW_CAP {
            return Err(Error::validation(format!(
                "excerpt of {} bytes exceeds the {WINDOW_CAP}-byte cap",
                ex.length
            )));
        }
    }
    Ok(())
}

/// Validates a selection and records the export in each included evidence's
/// chain of custody.
///
/// When `front_matter` is given it is also stored on the case; otherwise the
/// case's stored front matter is used.
pub fn build_report_spec(
    work: &Casework,
    case_id: u64,
    selection: &ReportSelection,
    front_matter: Option<FrontMatter>,
    principal: &str,
) -> Result<ReportSpec> {
    let case = work.case(case_id)?;
    let mut ids: Vec<u64> = match &selection.evidence_ids {
        Some(ids) => ids.clone(),
        None => case.evidences.iter().map(|e| e.id).collect(),
    };
    let mut seen = std::collections::HashSet::new();
    ids.retain(|id| seen.insert(*id));

    let title = selection
        .title
        .clone()
        .filter(|t| !t.trim().is_empty())
        .unwrap_or_else(|| format!("Case {}: {}", case.id, case.title));
    let spec = ReportSpec {
        case_id,
        title,
        front_matter: front_matter.clone().unwrap_or_else(|| case.front_matter.clone()),
        include_evidence_ids: ids,
        excerpts: selection.excerpts.clone(),
        include_notes: selection.include_notes,
        include_custody: selection.include_custody,
        generated_at: now_ms(),
    };
    validate_spec(&spec, &case)?;
    if let Some(fm) = front_matter {
        if fm != case.front_matter {
            work.set_front_matter(case_id, fm)?;
        }
    }
    let detail = format!("report \"{}\" at {}", spec.title, iso8601(spec.generated_at));
    work.record_events(
        case_id,
        &spec.include_evidence_ids,
        principal,
        Operation::ExportedToReport,
        &detail,
    )?;
    Ok(spec)
}

/// Format-neutral content of one report, computed once and then laid out by
/// a generator.
#[derive(Debug, Clone)]
pub struct ReportModel<'a> {
    pub spec: &'a ReportSpec,
    pub case: &'a Case,
    pub sections: Vec<EvidenceSection<'a>>,
}

#[derive(Debug, Clone)]
pub struct EvidenceSection<'a> {
    pub evidence: &'a Evidence,
    pub excerpts: Vec<(&'a Excerpt, String)>,
    /// Notes paired with whether their region overlaps an excerpt.
    pub notes: Vec<(&'a Note, bool)>,
    pub custody: &'a [CustodyEvent],
}

impl<'a> ReportModel<'a> {
    pub fn prepare(spec: &'a ReportSpec, case: &'a Case, data_root: &Path) -> Result<Self> {
        validate_spec(spec, case)?;
        let mut sections = Vec::with_capacity(spec.include_evidence_ids.len());
        for id in &spec.include_evidence_ids {
            let evidence = case.evidence(*id).expect("validated");
            let path = data_root.join(&evidence.managed_path);
            let mut excerpts = Vec::new();
            for ex in spec.excerpts.iter().filter(|ex| ex.evidence_id == *id) {
                let bytes = slice_file(&path, evidence.size_bytes, ex.offset, ex.length).map_err(|e| {
                    Error::Generation {
                        evidence_id: *id,
                        reason: e.to_string(),
                    }
                })?;
                excerpts.push((ex, render_hex(&bytes, ex.offset)));
            }
            let notes = if spec.include_notes {
                evidence
                    .notes
                    .iter()
                    .map(|n| {
                        let overlaps = n.region.is_some_and(|r| {
                            excerpts.iter().any(|(ex, _)| ex.region().overlaps(&r))
                        });
                        (n, overlaps)
                    })
                    .collect()
            } else {
                Vec::new()
            };
            let custody: &[CustodyEvent] = if spec.include_custody { &evidence.custody } else { &[] };
            sections.push(EvidenceSection {
                evidence,
                excerpts,
                notes,
                custody,
            });
        }
        Ok(ReportModel { spec, case, sections })
    }
}

/// Lays out a report in one document format.
pub trait ReportGenerator: Send + Sync {
    fn format_id(&self) -> &'static str;

    fn file_extension(&self) -> &'static str;

    fn media_type(&self) -> &'static str;

    fn render(&self, model: &ReportModel<'_>) -> String;

    fn generate(&self, spec: &ReportSpec, case: &Case, data_root: &Path) -> Result<String> {
        Ok(self.render(&ReportModel::prepare(spec, case, data_root)?))
    }
}

pub const SUPPORTED_FORMATS: [&str; 2] = ["latex", "html"];

pub fn generator_for(format_id: &str) -> Result<Box<dyn ReportGenerator>> {
    match format_id {
        "latex" => Ok(Box::new(LatexGenerator)),
        "html" => Ok(Box::new(HtmlGenerator)),
        other => Err(Error::UnsupportedFormat {
            requested: other.to_string(),
            supported: SUPPORTED_FORMATS.join(", "),
        }),
    }
}

pub fn reports_dir(data_root: &Path, case_id: u64) -> PathBuf {
    data_root.join(case_id.to_string()).join(REPORTS_DIR)
}

/// Generates a report and writes it to
/// `<data_root>/<case_id>/reports/<timestamp>.<ext>`.
pub fn write_report(
    generator: &dyn ReportGenerator,
    spec: &ReportSpec,
    case: &Case,
    data_root: &Path,
) -> Result<(PathBuf, String)> {
    let document = generator.generate(spec, case, data_root)?;
    let dir = reports_dir(data_root, spec.case_id);
    fs::create_dir_all(&dir).map_err(|e| Error::io(format!("cannot create {}", dir.display()), e))?;
    let path = dir.join(format!("{}.{}", file_stamp(spec.generated_at), generator.file_extension()));
    fs::write(&path, &document).map_err(|e| Error::io(format!("cannot write {}", path.display()), e))?;
    Ok((path, document))
}

/// Finds `bin` on `PATH`, or checks it directly when it contains a separator.
pub fn find_toolchain(bin: &str) -> Option<PathBuf> {
    let candidate = Path::new(bin);
    if candidate.components().count() > 1 {
        return candidate.is_file().then(|| candidate.to_path_buf());
    }
    std::env::split_paths(&std::env::var_os("PATH")?)
        .map(|dir| dir.join(bin))
        .find(|p| p.is_file())
}

/// Writes the LaTeX report and compiles it to PDF with an external
/// toolchain. The `.tex` file is kept whether or not compilation succeeds.
pub fn render_pdf(spec: &ReportSpec, case: &Case, data_root: &Path, latex_bin: &str) -> Result<PathBuf> {
    let (tex_path, _) = write_report(&LatexGenerator, spec, case, data_root)?;
    let Some(bin) = find_toolchain(latex_bin) else {
        return Err(Error::Unavailable(format!(
            "LaTeX toolchain `{latex_bin}` not found; install a TeX distribution such as TeX Live \
             or pass --latex-bin (LaTeX source kept at {})",
            tex_path.display()
        )));
    };
    let dir = tex_path.parent().expect("reports dir").to_path_buf();
    let mut child = Command::new(&bin)
        .arg("-interaction=nonstopmode")
        .arg("-halt-on-error")
        .arg(format!("-output-directory={}", dir.display()))
        .arg(&tex_path)
        .current_dir(&dir)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Error::Unavailable(format!("cannot start {}: {e}", bin.display())))?;
    let status = match child.wait_timeout(LATEX_TIMEOUT) {
        Ok(Some(status)) => status,
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Error::Compile {
                log: format!("{} timed out", bin.display()),
            });
        }
        Err(e) => return Err(Error::io("waiting for LaTeX", e)),
    };
    let pdf = tex_path.with_extension("pdf");
    if !status.success() || !pdf.is_file() {
        let log = fs::read_to_string(tex_path.with_extension("log"))
            .unwrap_or_else(|_| format!("{} exited with {status} and left no log", bin.display()));
        return Err(Error::Compile { log });
    }
    Ok(pdf)
}

/// Output format name accepted by [`export_report`] besides the generators.
pub const PDF_FORMAT: &str = "pdf";

/// A report written to disk.
#[derive(Debug, Clone)]
pub struct ExportedReport {
    pub spec: ReportSpec,
    pub path: PathBuf,
    pub media_type: &'static str,
}

/// Builds a spec from `selection`, records the export in custody and writes
/// the document in `format` (`latex`, `html` or `pdf`).
///
/// The format is checked before anything is recorded. For `pdf` a missing
/// toolchain is reported after the `.tex` file has been written.
#[allow(clippy::too_many_arguments)]
pub fn export_report(
    work: &Casework,
    case_id: u64,
    format: &str,
    selection: &ReportSelection,
    front_matter: Option<FrontMatter>,
    principal: &str,
    latex_bin: &str,
) -> Result<ExportedReport> {
    let generator = if format == PDF_FORMAT {
        None
    } else {
        Some(generator_for(format).map_err(|e| match e {
            Error::UnsupportedFormat { requested, .. } => Error::UnsupportedFormat {
                requested,
                supported: format!("{}, {PDF_FORMAT}", SUPPORTED_FORMATS.join(", ")),
            },
            other => other,
        })?)
    };
    let spec = build_report_spec(work, case_id, selection, front_matter, principal)?;
    let case = work.case(case_id)?;
    let (path, media_type) = match generator {
        Some(g) => (write_report(g.as_ref(), &spec, &case, work.data_root())?.0, g.media_type()),
        None => (render_pdf(&spec, &case, work.data_root(), latex_bin)?, "application/pdf"),
    };
    Ok(ExportedReport { spec, path, media_type })
}
