//! Python bindings for the ftklipse engine.
//!
//! Records cross the boundary as plain dicts and lists built from the same
//! JSON shapes the HTTP API returns. Engine errors raise subclasses of
//! `ftklipse.FtklipseError` carrying a machine-readable `code` attribute.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ftklipse_core::casework::{default_duplicate_name, default_extract_name, Region};
use ftklipse_core::reporting::{export_report, Excerpt, ReportSelection, DEFAULT_LATEX_BIN};
use ftklipse_core::rendering::{render_evidence, RenderFormat, RenderRequest, TextEncoding};
use ftklipse_core::toolkit::{plan_invocation, run_tool, ToolFilter, ToolRegistry};
use ftklipse_core::{AdapterKind, Casework, Error, ErrorClass, FrontMatter, Operation};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(ftklipse, FtklipseError, PyException, "Base class of engine errors.");
create_exception!(ftklipse, ValidationError, FtklipseError, "Bad input or unsupported request.");
create_exception!(ftklipse, NotFoundError, FtklipseError, "Unknown case, evidence or tool.");
create_exception!(ftklipse, IntegrityError, FtklipseError, "Digest mismatch, missing file or corrupt record.");
create_exception!(ftklipse, StorageError, FtklipseError, "File system failure.");
create_exception!(ftklipse, UnavailableError, FtklipseError, "A required external program is missing.");
create_exception!(ftklipse, ExecutionError, FtklipseError, "An external tool could not run to completion.");

fn raise(py: Python<'_>, e: Error) -> PyErr {
    let message = e.to_string();
    let err = match e.class() {
        ErrorClass::Validation => ValidationError::new_err(message),
        ErrorClass::NotFound => NotFoundError::new_err(message),
        ErrorClass::Integrity => IntegrityError::new_err(message),
        ErrorClass::Io => StorageError::new_err(message),
        ErrorClass::Unavailable => UnavailableError::new_err(message),
        ErrorClass::Internal => ExecutionError::new_err(message),
    };
    let value = err.value(py);
    let _ = value.setattr("code", e.code());
    if let Error::Launch { run, .. } | Error::Timeout { run, .. } = &e {
        if let Ok(result) = to_py(py, run.as_ref()) {
            let _ = value.setattr("result", result);
        }
    }
    err
}

/// Converts any serializable record to Python objects through `json`.
fn to_py<T: Serialize + ?Sized>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| FtklipseError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse<T: std::str::FromStr<Err = Error>>(py: Python<'_>, text: &str) -> PyResult<T> {
    text.parse().map_err(|e| raise(py, e))
}

/// A case store rooted at a data directory.
#[pyclass(module = "ftklipse")]
struct Workbench {
    work: Casework,
    principal: String,
}

impl Workbench {
    fn who(&self, principal: Option<String>) -> String {
        principal.unwrap_or_else(|| self.principal.clone())
    }

    fn call<T: Serialize + Send>(
        &self,
        py: Python<'_>,
        f: impl FnOnce(&Casework) -> Result<T, Error> + Send,
    ) -> PyResult<Py<PyAny>> {
        let work = &self.work;
        let value = py.detach(|| f(work)).map_err(|e| raise(py, e))?;
        to_py(py, &value)
    }
}

#[pymethods]
impl Workbench {
    #[new]
    #[pyo3(signature = (data_root, adapter = "file", principal = "python"))]
    fn new(py: Python<'_>, data_root: PathBuf, adapter: &str, principal: &str) -> PyResult<Self> {
        let kind: AdapterKind = parse(py, adapter)?;
        let work = py.detach(|| Casework::open(data_root, kind)).map_err(|e| raise(py, e))?;
        Ok(Workbench { work, principal: principal.to_string() })
    }

    #[getter]
    fn data_root(&self) -> PathBuf {
        self.work.data_root().to_path_buf()
    }

    #[pyo3(signature = (title, investigator = None))]
    fn create_case(&self, py: Python<'_>, title: &str, investigator: Option<String>) -> PyResult<Py<PyAny>> {
        let investigator = self.who(investigator);
        self.call(py, |w| w.create_case(title, &investigator))
    }

    fn cases(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        self.call(py, |w| w.cases())
    }

    fn case(&self, py: Python<'_>, case_id: u64) -> PyResult<Py<PyAny>> {
        self.call(py, |w| w.case(case_id))
    }

    fn evidence(&self, py: Python<'_>, evidence_id: u64) -> PyResult<Py<PyAny>> {
        self.call(py, |w| w.evidence(evidence_id))
    }

    #[pyo3(signature = (case_id, path, name = None, principal = None))]
    fn import_evidence(
        &self,
        py: Python<'_>,
        case_id: u64,
        path: PathBuf,
        name: Option<String>,
        principal: Option<String>,
    ) -> PyResult<Py<PyAny>> {
        let who = self.who(principal);
        self.call(py, |w| match name {
            Some(n) => w.import_evidence_as(case_id, &path, &n, &who),
            None => w.import_evidence(case_id, &path, &who),
        })
    }

    #[pyo3(signature = (evidence_id, principal = None))]
    fn verify(&self, py: Python<'_>, evidence_id: u64, principal: Option<String>) -> PyResult<Py<PyAny>> {
        let who = self.who(principal);
        self.call(py, |w| w.verify_evidence(evidence_id, &who))
    }

    #[pyo3(signature = (evidence_id, offset, length, name = None, principal = None))]
    fn extract(
        &self,
        py: Python<'_>,
        evidence_id: u64,
        offset: u64,
        length: u64,
        name: Option<String>,
        principal: Option<String>,
    ) -> PyResult<Py<PyAny>> {
        let who = self.who(principal);
        self.call(py, |w| {
            let name = match name {
                Some(n) => n,
                None => default_extract_name(&w.evidence(evidence_id)?.original_name, offset, length),
            };
            w.extract_region(evidence_id, offset, length, &name, &who)
        })
    }

    #[pyo3(signature = (evidence_id, name = None, principal = None))]
    fn duplicate(
        &self,
        py: Python<'_>,
        evidence_id: u64,
        name: Option<String>,
        principal: Option<String>,
    ) -> PyResult<Py<PyAny>> {
        let who = self.who(principal);
        self.call(py, |w| {
            let name = match name {
                Some(n) => n,
                None => default_duplicate_name(&w.evidence(evidence_id)?.original_name),
            };
            w.duplicate_evidence(evidence_id, &name, &who)
        })
    }

    /// Adds a note, optionally tied to the byte range `[offset, offset + length)`.
    #[pyo3(signature = (evidence_id, text, offset = None, length = None, principal = None))]
    fn add_note(
        &self,
        py: Python<'_>,
        evidence_id: u64,
        text: &str,
        offset: Option<u64>,
        length: Option<u64>,
        principal: Option<String>,
    ) -> PyResult<Py<PyAny>> {
        let region = match (offset, length) {
            (Some(offset), Some(length)) => Some(Region { offset, length }),
            (None, None) => None,
            _ => return Err(ValidationError::new_err("offset and length go together")),
        };
        let who = self.who(principal);
        self.call(py, |w| w.add_note(evidence_id, &who, text, region))
    }

    fn custody(&self, py: Python<'_>, evidence_id: u64) -> PyResult<Py<PyAny>> {
        self.call(py, |w| w.list_custody(evidence_id))
    }

    /// Renders a window of the evidence and records the view in custody.
    #[pyo3(signature = (evidence_id, format = "hex", offset = 0, length = None, encoding = None, principal = None))]
    #[allow(clippy::too_many_arguments)]
    fn render(
        &self,
        py: Python<'_>,
        evidence_id: u64,
        format: &str,
        offset: u64,
        length: Option<u64>,
        encoding: Option<&str>,
        principal: Option<String>,
    ) -> PyResult<String> {
        let format: RenderFormat = parse(py, format)?;
        let encoding: Option<TextEncoding> = encoding.map(|e| parse(py, e)).transpose()?;
        let who = self.who(principal);
        let work = &self.work;
        py.detach(|| {
            let evidence = work.evidence(evidence_id)?;
            let length = length.unwrap_or_else(|| RenderRequest::default_length(evidence.size_bytes, offset));
            let mut request = RenderRequest::new(format, offset, length);
            request.encoding = encoding;
            let text = render_evidence(work, &evidence, &request)?;
            work.record_event(evidence_id, &who, Operation::Viewed, request.describe())?;
            Ok(text)
        })
        .map_err(|e| raise(py, e))
    }

    #[pyo3(signature = (case_id, executive_summary = None, introduction = None, conclusion = None))]
    fn set_front_matter(
        &self,
        py: Python<'_>,
        case_id: u64,
        executive_summary: Option<String>,
        introduction: Option<String>,
        conclusion: Option<String>,
    ) -> PyResult<Py<PyAny>> {
        self.call(py, |w| {
            let current = w.case(case_id)?.front_matter;
            let fm = FrontMatter {
                executive_summary: executive_summary.unwrap_or(current.executive_summary),
                introduction: introduction.unwrap_or(current.introduction),
                conclusion: conclusion.unwrap_or(current.conclusion),
            };
            Ok(w.set_front_matter(case_id, fm)?.front_matter)
        })
    }

    /// Writes a report and returns `{"path", "media_type", "spec"}`.
    ///
    /// `excerpts` is a list of `(evidence_id, offset, length, caption)`.
    #[pyo3(signature = (
        case_id, format = "latex", title = None, evidence_ids = None, excerpts = None,
        include_notes = true, include_custody = true, latex_bin = DEFAULT_LATEX_BIN, principal = None
    ))]
    #[allow(clippy::too_many_arguments)]
    fn export_report(
        &self,
        py: Python<'_>,
        case_id: u64,
        format: &str,
        title: Option<String>,
        evidence_ids: Option<Vec<u64>>,
        excerpts: Option<Vec<(u64, u64, u64, String)>>,
        include_notes: bool,
        include_custody: bool,
        latex_bin: &str,
        principal: Option<String>,
    ) -> PyResult<Py<PyAny>> {
        let selection = ReportSelection {
            title,
            evidence_ids,
            excerpts: excerpts
                .unwrap_or_default()
                .into_iter()
                .map(|(evidence_id, offset, length, caption)| Excerpt { evidence_id, offset, length, caption })
                .collect(),
            include_notes,
            include_custody,
        };
        let who = self.who(principal);
        self.call(py, |w| {
            let r = export_report(w, case_id, format, &selection, None, &who, latex_bin)?;
            Ok(serde_json::json!({ "path": r.path, "media_type": r.media_type, "spec": r.spec }))
        })
    }

    /// Runs a registered tool from `tools_dir` against one evidence.
    #[pyo3(signature = (tools_dir, tool_id, evidence_id, params = None, timeout_s = None, principal = None))]
    #[allow(clippy::too_many_arguments)]
    fn run_tool(
        &self,
        py: Python<'_>,
        tools_dir: PathBuf,
        tool_id: &str,
        evidence_id: u64,
        params: Option<BTreeMap<String, String>>,
        timeout_s: Option<u64>,
        principal: Option<String>,
    ) -> PyResult<Py<PyAny>> {
        let who = self.who(principal);
        self.call(py, |w| {
            let (registry, _) = ToolRegistry::load_dir(&tools_dir);
            let manifest = registry
                .get(tool_id)
                .ok_or_else(|| Error::Validation(format!("tool `{tool_id}` is not registered")))?;
            let evidence = w.evidence(evidence_id)?;
            let mut plan = plan_invocation(manifest, &evidence, &params.unwrap_or_default(), w.data_root())?;
            if let Some(t) = timeout_s {
                plan.timeout_s = t;
            }
            run_tool(w, &plan, &who)
        })
    }

    fn close(&self) {
        self.work.close();
    }

    fn __repr__(&self) -> String {
        format!("Workbench({:?})", self.work.data_root())
    }
}

/// Canonical hex dump of `data`, row offsets starting at `base_offset`.
#[pyfunction]
#[pyo3(signature = (data, base_offset = 0))]
fn render_hex(data: &[u8], base_offset: u64) -> String {
    ftklipse_core::rendering::render_hex(data, base_offset)
}

#[pyfunction]
fn render_ascii(data: &[u8]) -> String {
    ftklipse_core::rendering::render_ascii(data)
}

/// Tools registered in `tools_dir` that match every given filter.
#[pyfunction]
#[pyo3(signature = (tools_dir, tool_type = None, platform = None, in_batch_menu = None, in_right_click_menu = None))]
fn list_tools(
    py: Python<'_>,
    tools_dir: PathBuf,
    tool_type: Option<&str>,
    platform: Option<&str>,
    in_batch_menu: Option<bool>,
    in_right_click_menu: Option<bool>,
) -> PyResult<Py<PyAny>> {
    let filter = ToolFilter {
        tool_type: tool_type.map(|t| parse(py, t)).transpose()?,
        platform: platform.map(|p| parse(py, p)).transpose()?,
        in_batch_menu,
        in_right_click_menu,
    };
    let (registry, _) = ToolRegistry::load_dir(&tools_dir);
    to_py(py, &registry.list(&filter))
}

#[pyfunction]
fn parse_manifest(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    let manifest = ftklipse_core::toolkit::parse_manifest(text).map_err(|e| raise(py, e))?;
    to_py(py, &manifest)
}

#[pymodule]
fn ftklipse(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<Workbench>()?;
    m.add_function(wrap_pyfunction!(render_hex, m)?)?;
    m.add_function(wrap_pyfunction!(render_ascii, m)?)?;
    m.add_function(wrap_pyfunction!(list_tools, m)?)?;
    m.add_function(wrap_pyfunction!(parse_manifest, m)?)?;
    m.add("FtklipseError", py.get_type::<FtklipseError>())?;
    m.add("ValidationError", py.get_type::<ValidationError>())?;
    m.add("NotFoundError", py.get_type::<NotFoundError>())?;
    m.add("IntegrityError", py.get_type::<IntegrityError>())?;
    m.add("StorageError", py.get_type::<StorageError>())?;
    m.add("UnavailableError", py.get_type::<UnavailableError>())?;
    m.add("ExecutionError", py.get_type::<ExecutionError>())?;
    Ok(())
}
