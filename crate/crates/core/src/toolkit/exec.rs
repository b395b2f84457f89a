//! Turning a manifest into an argv and running it.
//!
//! Templates are split on whitespace first and placeholders substituted
//! inside each token afterwards, so a substituted value is always exactly
//! one argument no matter what it contains. The process is spawned directly,
//! never through a shell.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use super::manifest::{parse_template, ParamKind, Placeholder, Platform, Segment, ToolManifest};
use crate::casework::{sanitize_name, Casework, Evidence, Operation, VerificationResult};
use crate::error::{Error, Result};
use crate::time::{now_ms, TimestampMs};

pub const DEFAULT_TIMEOUT_S: u64 = 300;
pub const OUTPUT_CAP_BYTES: usize = 10 * 1024 * 1024;
pub const TOOL_OUTPUT_DIR: &str = "tool_output";

/// Host OS family mapped onto the manifest platform values.
pub fn current_platform() -> Result<Platform> {
    if cfg!(windows) {
        Ok(Platform::Win)
    } else if cfg!(unix) {
        Ok(Platform::Unix)
    } else {
        Err(Error::Platform(format!("unsupported host OS `{}`", std::env::consts::OS)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvocationPlan {
    pub tool_id: String,
    pub argv: Vec<String>,
    pub working_dir: PathBuf,
    pub case_id: u64,
    pub evidence_id: u64,
    pub output_path: Option<PathBuf>,
    pub timeout_s: u64,
}

/// Builds the argv for running `manifest` against `evidence` on this host.
///
/// Paths are joined onto `data_root` as given, so a relative data root gives
/// relative paths resolved from the current directory.
pub fn plan_invocation(
    manifest: &ToolManifest,
    evidence: &Evidence,
    params: &BTreeMap<String, String>,
    data_root: &Path,
) -> Result<InvocationPlan> {
    plan_invocation_on(current_platform()?, manifest, evidence, params, data_root)
}

pub fn plan_invocation_on(
    host: Platform,
    manifest: &ToolManifest,
    evidence: &Evidence,
    params: &BTreeMap<String, String>,
    data_root: &Path,
) -> Result<InvocationPlan> {
    if manifest.platform != host {
        return Err(Error::Platform(format!(
            "tool `{}` runs on {} but this host is {host}",
            manifest.id, manifest.platform
        )));
    }
    let values = resolve_params(manifest, params)?;
    let case_dir = data_root.join(evidence.case_id.to_string());
    let evidence_path = data_root.join(&evidence.managed_path);

    let output_path = match &manifest.output_file {
        Some(template) => {
            let mut name = String::new();
            for seg in parse_template("output_file", template)? {
                name.push_str(&match seg {
                    Segment::Literal(s) => s,
                    Segment::Slot(Placeholder::EvidenceId) => evidence.id.to_string(),
                    Segment::Slot(Placeholder::ToolId) => manifest.id.clone(),
                    Segment::Slot(Placeholder::Param(k)) => values[&k].clone(),
                    Segment::Slot(other) => {
                        return Err(Error::Manifest {
                            field: "output_file".into(),
                            message: format!("placeholder {other:?} not allowed"),
                        })
                    }
                });
            }
            Some(case_dir.join(TOOL_OUTPUT_DIR).join(sanitize_name(&name)))
        }
        None => None,
    };

    let mut argv = Vec::new();
    for token in manifest.command_template.split_whitespace() {
        let mut arg = String::new();
        for seg in parse_template("command", token)? {
            match seg {
                Segment::Literal(s) => arg.push_str(&s),
                Segment::Slot(Placeholder::EvidencePath) => arg.push_str(&evidence_path.to_string_lossy()),
                Segment::Slot(Placeholder::CaseDir) => arg.push_str(&case_dir.to_string_lossy()),
                Segment::Slot(Placeholder::EvidenceId) => arg.push_str(&evidence.id.to_string()),
                Segment::Slot(Placeholder::ToolId) => arg.push_str(&manifest.id),
                Segment::Slot(Placeholder::OutputPath) => {
                    let out = output_path.as_ref().ok_or_else(|| Error::Manifest {
                        field: "command".into(),
                        message: "`{output_path}` used without `output_file`".into(),
                    })?;
                    arg.push_str(&out.to_string_lossy());
                }
                Segment::Slot(Placeholder::Param(k)) => arg.push_str(&values[&k]),
            }
        }
        argv.push(arg);
    }

    Ok(InvocationPlan {
        tool_id: manifest.id.clone(),
        argv,
        working_dir: std::env::current_dir().unwrap_or_else(|_| PathBuf::from(".")),
        case_id: evidence.case_id,
        evidence_id: evidence.id,
        output_path,
        timeout_s: DEFAULT_TIMEOUT_S,
    })
}

fn resolve_params(
    manifest: &ToolManifest,
    params: &BTreeMap<String, String>,
) -> Result<BTreeMap<String, String>> {
    if let Some(unknown) = params.keys().find(|k| manifest.param(k).is_none()) {
        return Err(Error::validation(format!(
            "tool `{}` has no parameter `{unknown}`",
            manifest.id
        )));
    }
    let mut values = BTreeMap::new();
    for spec in &manifest.param_form {
        let value = params
            .get(&spec.key)
            .or(spec.default.as_ref())
            .ok_or_else(|| Error::validation(format!("missing required parameter `{}`", spec.key)))?;
        if spec.kind == ParamKind::Flag && !matches!(value.as_str(), "true" | "false") {
            return Err(Error::validation(format!(
                "flag parameter `{}` must be true or false",
                spec.key
            )));
        }
        values.insert(spec.key.clone(), value.clone());
    }
    Ok(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    Exited,
    TimedOut,
    LaunchFailed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolRunResult {
    pub tool_id: String,
    pub evidence_id: u64,
    pub argv: Vec<String>,
    pub outcome: RunOutcome,
    /// `None` when the process never ran or was killed.
    pub exit_code: Option<i32>,
    pub stdout: String,
    pub stderr: String,
    pub stdout_truncated: bool,
    pub stderr_truncated: bool,
    pub started_at: TimestampMs,
    pub finished_at: TimestampMs,
    pub post_verification: VerificationResult,
    pub output_evidence_id: Option<u64>,
}

struct Captured {
    bytes: Vec<u8>,
    truncated: bool,
}

fn capture(mut stream: impl Read + Send + 'static) -> (Arc<Mutex<Captured>>, thread::JoinHandle<()>) {
    let sink = Arc::new(Mutex::new(Captured {
        bytes: Vec::new(),
        truncated: false,
    }));
    let shared = sink.clone();
    let handle = thread::spawn(move || {
        let mut buf = [0u8; 16 * 1024];
        loop {
            match stream.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => {
                    let mut c = shared.lock().unwrap();
                    let room = OUTPUT_CAP_BYTES.saturating_sub(c.bytes.len());
                    if n > room {
                        c.truncated = true;
                    }
                    let take = n.min(room);
                    c.bytes.extend_from_slice(&buf[..take]);
                }
            }
        }
    });
    (sink, handle)
}

fn take_captured(sink: &Arc<Mutex<Captured>>) -> (String, bool) {
    let c = sink.lock().unwrap();
    (String::from_utf8_lossy(&c.bytes).into_owned(), c.truncated)
}

#[cfg(unix)]
fn kill_tree(child: &mut std::process::Child) {
    use nix::sys::signal::{killpg, Signal};
    use nix::unistd::Pid;
    // The child leads its own process group; take its descendants with it.
    let _ = killpg(Pid::from_raw(child.id() as i32), Signal::SIGKILL);
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill_tree(child: &mut std::process::Child) {
    let _ = child.kill();
}

/// Runs a planned tool against its evidence.
///
/// Exactly one `tool_run` custody event is appended to the input evidence
/// whatever happens, and the evidence is re-hashed after the process ends.
/// A non-zero exit is a normal result; failing to start and timing out are
/// errors that still carry the full [`ToolRunResult`].
pub fn run_tool(work: &Casework, plan: &InvocationPlan, principal: &str) -> Result<ToolRunResult> {
    let evidence = work.evidence(plan.evidence_id)?;
    if plan.argv.is_empty() {
        return Err(Error::validation("empty argv"));
    }
    if plan.timeout_s == 0 {
        return Err(Error::validation("timeout must be at least one second"));
    }
    if let Some(out) = &plan.output_path {
        if let Some(parent) = out.parent() {
            fs::create_dir_all(parent)
                .map_err(|e| Error::io(format!("cannot create {}", parent.display()), e))?;
        }
        // A leftover from an earlier run must not be imported as this run's output.
        let _ = fs::remove_file(out);
    }

    let mut cmd = Command::new(&plan.argv[0]);
    cmd.args(&plan.argv[1..])
        .current_dir(&plan.working_dir)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }

    let started_at = now_ms();
    let mut outcome = RunOutcome::Exited;
    let mut exit_code = None;
    let mut launch_error = None;
    let mut streams = None;

    match cmd.spawn() {
        Err(e) => {
            outcome = RunOutcome::LaunchFailed;
            launch_error = Some(e.to_string());
        }
        Ok(mut child) => {
            let out = capture(child.stdout.take().expect("piped"));
            let err = capture(child.stderr.take().expect("piped"));
            match child.wait_timeout(Duration::from_secs(plan.timeout_s)) {
                Ok(Some(status)) => exit_code = status.code(),
                Ok(None) => {
                    outcome = RunOutcome::TimedOut;
                    kill_tree(&mut child);
                    let _ = child.wait();
                }
                Err(e) => {
                    kill_tree(&mut child);
                    let _ = child.wait();
                    outcome = RunOutcome::LaunchFailed;
                    launch_error = Some(format!("wait failed: {e}"));
                }
            }
            for handle in [out.1, err.1] {
                let _ = handle.join();
            }
            streams = Some((out.0, err.0));
        }
    }
    let finished_at = now_ms().max(started_at);
    let ((stdout, stdout_truncated), (stderr, stderr_truncated)) = match &streams {
        Some((o, e)) => (take_captured(o), take_captured(e)),
        None => ((String::new(), false), (String::new(), false)),
    };

    let mut output_evidence_id = None;
    let mut output_note = String::from("output=none");
    if let (RunOutcome::Exited, Some(out)) = (outcome, &plan.output_path) {
        if out.is_file() {
            let name = out
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("{}-output", plan.tool_id));
            let detail = format!(
                "output of tool {} run on evidence {}",
                plan.tool_id, evidence.id
            );
            match work.import_file(evidence.case_id, out, &name, principal, Some(evidence.id), detail) {
                Ok(child) => {
                    output_note = format!("output={} child={}", out.display(), child.id);
                    output_evidence_id = Some(child.id);
                }
                Err(e) => output_note = format!("output={} import failed: {e}", out.display()),
            }
        }
    }

    let verification = work.check_digest(&evidence);
    let verify_note = match &verification {
        Ok(v) => format!("verify={}", v.detail()),
        Err(e) => format!("verify=failed: {e}"),
    };
    let status_note = match (outcome, exit_code, &launch_error) {
        (RunOutcome::LaunchFailed, _, Some(reason)) => format!("launch failed: {reason}"),
        (RunOutcome::TimedOut, _, _) => format!("timeout after {} s", plan.timeout_s),
        (_, Some(code), _) => format!("exit={code}"),
        _ => "exit=signal".to_string(),
    };
    let mut detail = format!("tool={} {status_note} {output_note} {verify_note}", plan.tool_id);
    if stdout_truncated || stderr_truncated {
        detail.push_str(" (captured output truncated)");
    }
    work.record_event(evidence.id, principal, Operation::ToolRun, detail)?;

    let result = ToolRunResult {
        tool_id: plan.tool_id.clone(),
        evidence_id: evidence.id,
        argv: plan.argv.clone(),
        outcome,
        exit_code,
        stdout,
        stderr,
        stdout_truncated,
        stderr_truncated,
        started_at,
        finished_at,
        post_verification: verification?,
        output_evidence_id,
    };
    match outcome {
        RunOutcome::Exited => Ok(result),
        RunOutcome::TimedOut => Err(Error::Timeout {
            tool_id: plan.tool_id.clone(),
            timeout_s: plan.timeout_s,
            run: Box::new(result),
        }),
        RunOutcome::LaunchFailed => Err(Error::Launch {
            tool_id: plan.tool_id.clone(),
            reason: launch_error.unwrap_or_default(),
            run: Box::new(result),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toolkit::manifest::parse_manifest;

    fn evidence() -> Evidence {
        Evidence {
            id: 5,
            case_id: 1,
            original_name: "x.bin".into(),
            managed_path: PathBuf::from("1/5_x.bin"),
            size_bytes: 3,
            hash_algorithm: "sha256".into(),
            reference_hash: String::new(),
            imported_at: 0,
            parent_evidence_id: None,
            notes: vec![],
            custody: vec![],
        }
    }

    fn params(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn single_substitution() {
        let m = parse_manifest("id = file\ncommand = file {evidence_path}\nplatform = unix").unwrap();
        let plan = plan_invocation_on(Platform::Unix, &m, &evidence(), &params(&[]), Path::new("data")).unwrap();
        assert_eq!(plan.argv, ["file", "data/1/5_x.bin"]);
        assert_eq!(plan.timeout_s, DEFAULT_TIMEOUT_S);
        assert_eq!(plan.output_path, None);
    }

    #[test]
    fn param_substitution() {
        let m = parse_manifest(
            "id = strings\ncommand = strings -n {param:minlen} {evidence_path}\nplatform = unix\nparam = minlen|Min|text|",
        )
        .unwrap();
        let plan = plan_invocation_on(
            Platform::Unix,
            &m,
            &evidence(),
            &params(&[("minlen", "4")]),
            Path::new("data"),
        )
        .unwrap();
        assert_eq!(plan.argv, ["strings", "-n", "4", "data/1/5_x.bin"]);
        let missing = plan_invocation_on(Platform::Unix, &m, &evidence(), &params(&[]), Path::new("data"));
        assert!(matches!(missing, Err(Error::Validation(_))));
        let unknown = plan_invocation_on(
            Platform::Unix,
            &m,
            &evidence(),
            &params(&[("minlen", "4"), ("bogus", "1")]),
            Path::new("data"),
        );
        assert!(matches!(unknown, Err(Error::Validation(_))));
    }

    #[test]
    fn values_never_split_argv() {
        let m = parse_manifest(
            "id = t\ncommand = echo pre{param:v}post {param:v}\nplatform = unix\nparam = v|V|text|",
        )
        .unwrap();
        let hostile = "a b; rm -rf / && $(x) 'q\" \t|";
        let plan = plan_invocation_on(Platform::Unix, &m, &evidence(), &params(&[("v", hostile)]), Path::new("d"))
            .unwrap();
        assert_eq!(plan.argv.len(), 3);
        assert_eq!(plan.argv[1], format!("pre{hostile}post"));
        assert_eq!(plan.argv[2], hostile);
    }

    #[test]
    fn platform_gate() {
        let m = parse_manifest("id = w\ncommand = dir.exe {evidence_path}\nplatform = win").unwrap();
        let err = plan_invocation_on(Platform::Unix, &m, &evidence(), &params(&[]), Path::new("data"));
        assert!(matches!(err, Err(Error::Platform(_))));
        assert!(plan_invocation_on(Platform::Win, &m, &evidence(), &params(&[]), Path::new("data")).is_ok());
    }

    #[test]
    fn output_path_under_tool_output() {
        let m = parse_manifest(
            "id = carve\ncommand = carve {evidence_path} -o {output_path}\noutput_file = {tool_id}-{evidence_id}.out\nplatform = unix",
        )
        .unwrap();
        let plan = plan_invocation_on(Platform::Unix, &m, &evidence(), &params(&[]), Path::new("data")).unwrap();
        let expected = PathBuf::from("data/1/tool_output/carve-5.out");
        assert_eq!(plan.output_path.as_deref(), Some(expected.as_path()));
        assert_eq!(plan.argv[3], "data/1/tool_output/carve-5.out");
    }

    #[test]
    fn host_is_unix_and_stable() {
        if cfg!(unix) {
            assert_eq!(current_platform().unwrap(), Platform::Unix);
        }
        assert_eq!(current_platform().ok(), current_platform().ok());
    }
}
