//! `ftklipse <noun> <verb> [flags]` over the case engine.
//!
//! [`run`] is the whole program: it parses arguments, performs exactly one
//! engine operation and returns the process exit code. Output goes to the
//! writers it is handed, so tests can drive it in-process.
//!
//! Exit codes: 0 success, 1 validation or usage, 2 integrity, 3 I/O.

#![forbid(unsafe_code)]

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use ftklipse_core::audit_log::{LogSink, DEFAULT_LOG_NAME};
use ftklipse_core::casework::{default_duplicate_name, default_extract_name, Region};
use ftklipse_core::reporting::{export_report, Excerpt, ReportSelection, DEFAULT_LATEX_BIN};
use ftklipse_core::rendering::{render_evidence, RenderFormat, RenderRequest, TextEncoding};
use ftklipse_core::time::iso8601;
use ftklipse_core::toolkit::{plan_invocation, run_tool, Platform, ToolFilter, ToolRegistry, ToolType};
use ftklipse_core::{AdapterKind, Casework, Error, ErrorClass, FrontMatter, Operation};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_INTEGRITY: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub fn exit_code_for(class: ErrorClass) -> i32 {
    match class {
        ErrorClass::Validation | ErrorClass::NotFound => EXIT_VALIDATION,
        ErrorClass::Integrity => EXIT_INTEGRITY,
        ErrorClass::Io | ErrorClass::Unavailable | ErrorClass::Internal => EXIT_IO,
    }
}

#[derive(Debug, Parser)]
#[command(name = "ftklipse", version, about = "Forensics case workbench")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    noun: Noun,
}

#[derive(Debug, Args)]
struct Global {
    /// Directory holding the case store and evidence files.
    #[arg(long, global = true, default_value = "data")]
    data_root: PathBuf,
    /// Directory scanned for tool manifests.
    #[arg(long, global = true, default_value = "tools.d")]
    tools_dir: PathBuf,
    /// Name recorded in custody events.
    #[arg(long, global = true)]
    principal: Option<String>,
    /// Operations log; defaults to `ftklipse.application.log` in the data root.
    #[arg(long, global = true)]
    log_file: Option<PathBuf>,
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, default_value = "file")]
    adapter: AdapterKind,
    /// LaTeX compiler used for PDF reports.
    #[arg(long, global = true, default_value = DEFAULT_LATEX_BIN)]
    latex_bin: String,
}

#[derive(Debug, Subcommand)]
enum Noun {
    /// Create and inspect cases.
    #[command(subcommand)]
    Case(CaseCmd),
    /// Import, inspect and derive evidence.
    #[command(subcommand)]
    Evidence(EvidenceCmd),
    /// Investigator notes on evidence.
    #[command(subcommand)]
    Note(NoteCmd),
    /// Registered external tools.
    #[command(subcommand)]
    Tool(ToolCmd),
    /// Case reports.
    #[command(subcommand)]
    Report(ReportCmd),
    /// Run the local HTTP service until interrupted.
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
enum CaseCmd {
    Create {
        #[arg(long)]
        title: String,
        /// Defaults to the principal.
        #[arg(long)]
        investigator: Option<String>,
    },
    List,
    Show {
        #[arg(long)]
        id: u64,
    },
    /// Stores the report front matter on the case.
    FrontMatter {
        #[arg(long)]
        id: u64,
        #[command(flatten)]
        text: FrontMatterArgs,
    },
}

#[derive(Debug, Args, Clone, Default)]
struct FrontMatterArgs {
    #[arg(long)]
    summary: Option<String>,
    #[arg(long)]
    introduction: Option<String>,
    #[arg(long)]
    conclusion: Option<String>,
}

impl FrontMatterArgs {
    fn is_empty(&self) -> bool {
        self.summary.is_none() && self.introduction.is_none() && self.conclusion.is_none()
    }

    fn merged(self, base: FrontMatter) -> FrontMatter {
        FrontMatter {
            executive_summary: self.summary.unwrap_or(base.executive_summary),
            introduction: self.introduction.unwrap_or(base.introduction),
            conclusion: self.conclusion.unwrap_or(base.conclusion),
        }
    }
}

#[derive(Debug, Subcommand)]
enum EvidenceCmd {
    Import {
        #[arg(long = "case")]
        case_id: u64,
        #[arg(long)]
        file: PathBuf,
        /// Name to record instead of the file name.
        #[arg(long)]
        name: Option<String>,
    },
    Show {
        #[arg(long)]
        id: u64,
    },
    Verify {
        #[arg(long)]
        id: u64,
    },
    Render {
        #[arg(long)]
        id: u64,
        #[arg(long, default_value = "hex")]
        format: RenderFormat,
        #[arg(long, default_value_t = 0)]
        offset: u64,
        /// Defaults to the rest of the file, up to 4096 bytes.
        #[arg(long)]
        length: Option<u64>,
        #[arg(long)]
        encoding: Option<TextEncoding>,
    },
    Extract {
        #[arg(long)]
        id: u64,
        #[arg(long)]
        offset: u64,
        #[arg(long)]
        length: u64,
        #[arg(long)]
        name: Option<String>,
    },
    Duplicate {
        #[arg(long)]
        id: u64,
        #[arg(long)]
        name: Option<String>,
    },
    Custody {
        #[arg(long)]
        id: u64,
    },
}

#[derive(Debug, Subcommand)]
enum NoteCmd {
    Add {
        #[arg(long)]
        evidence: u64,
        #[arg(long)]
        text: String,
        /// Byte range the note refers to; requires --length.
        #[arg(long, requires = "length")]
        offset: Option<u64>,
        #[arg(long, requires = "offset")]
        length: Option<u64>,
    },
    List {
        #[arg(long)]
        evidence: u64,
    },
}

#[derive(Debug, Subcommand)]
enum ToolCmd {
    List {
        #[arg(long = "type")]
        tool_type: Option<ToolType>,
        #[arg(long)]
        platform: Option<Platform>,
        #[arg(long)]
        batch: Option<bool>,
        #[arg(long)]
        right_click: Option<bool>,
    },
    Run {
        #[arg(long)]
        tool: String,
        #[arg(long)]
        evidence: u64,
        /// `key=value`, repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, String)>,
        #[arg(long)]
        timeout: Option<u64>,
    },
}

#[derive(Debug, Subcommand)]
enum ReportCmd {
    Generate {
        #[arg(long = "case")]
        case_id: u64,
        #[arg(long, default_value = "latex")]
        format: String,
        #[arg(long)]
        title: Option<String>,
        /// Evidence to include, repeatable. Defaults to all.
        #[arg(long = "evidence")]
        evidence_ids: Vec<u64>,
        /// `evidence:offset:length[:caption]`, repeatable.
        #[arg(long = "excerpt", value_parser = parse_excerpt)]
        excerpts: Vec<Excerpt>,
        #[arg(long)]
        no_notes: bool,
        #[arg(long)]
        no_custody: bool,
        #[command(flatten)]
        text: FrontMatterArgs,
    },
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = ftklipse_server::DEFAULT_BIND)]
    bind: String,
    /// Built web UI to serve under /ui/.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(format!("expected key=value, got `{s}`")),
    }
}

fn parse_excerpt(s: &str) -> Result<Excerpt, String> {
    let mut parts = s.splitn(4, ':');
    let mut num = |what: &str| -> Result<u64, String> {
        parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| format!("excerpt `{s}`: missing or invalid {what}"))
    };
    let evidence_id = num("evidence id")?;
    let offset = num("offset")?;
    let length = num("length")?;
    let caption = parts.next().unwrap_or_default().to_string();
    Ok(Excerpt { evidence_id, offset, length, caption })
}

/// Why a command failed, with the exit code it maps to.
enum Failure {
    Engine(Error),
    /// Verification found different bytes. The MISMATCH line is already out.
    Mismatch,
    Output(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Output(e)
    }
}

type CmdResult = Result<(), Failure>;

struct Ctx<'a> {
    work: Casework,
    global: &'a Global,
    principal: String,
    log: Arc<LogSink>,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn log(&self, message: &str) {
        let _ = self.log.log(&format!("{}: {message}", self.principal));
    }

    /// Prints `value` as JSON in `--json` mode, otherwise the human text.
    fn emit<T: Serialize>(&mut self, value: &T, human: impl FnOnce() -> String) -> CmdResult {
        if self.global.json {
            serde_json::to_writer_pretty(&mut *self.out, value).map_err(std::io::Error::other)?;
            writeln!(self.out)?;
        } else {
            let text = human();
            self.out.write_all(text.as_bytes())?;
            if !text.is_empty() && !text.ends_with('\n') {
                writeln!(self.out)?;
            }
        }
        Ok(())
    }
}

fn default_principal() -> String {
    std::env::var("USER")
        .ok()
        .filter(|u| !u.trim().is_empty())
        .unwrap_or_else(|| "examiner".to_string())
}

/// Runs one command and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_VALIDATION
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let json = cli.global.json;
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Mismatch) => EXIT_INTEGRITY,
        Err(Failure::Output(e)) => {
            let _ = writeln!(err, "error: cannot write output: {e}");
            EXIT_IO
        }
        Err(Failure::Engine(e)) => {
            if json {
                let body = serde_json::json!({"error": {"code": e.code(), "message": e.to_string()}});
                let _ = writeln!(err, "{body}");
            } else {
                let _ = writeln!(err, "error: {e}");
            }
            exit_code_for(e.class())
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> CmdResult {
    let global = &cli.global;
    let principal = match &global.principal {
        Some(p) if p.trim().is_empty() => {
            return Err(Error::Validation("--principal must not be empty".into()).into())
        }
        Some(p) => p.trim().to_string(),
        None => default_principal(),
    };
    if let Noun::Serve(args) = cli.noun {
        return serve(global, principal, args, out);
    }
    let work = Casework::open(&global.data_root, global.adapter)?;
    let log = Arc::new(open_log(global, true)?);
    let mut ctx = Ctx { work, global, principal, log, out };
    let result = match cli.noun {
        Noun::Case(c) => case_cmd(&mut ctx, c),
        Noun::Evidence(c) => evidence_cmd(&mut ctx, c),
        Noun::Note(c) => note_cmd(&mut ctx, c),
        Noun::Tool(c) => tool_cmd(&mut ctx, c),
        Noun::Report(c) => report_cmd(&mut ctx, c),
        Noun::Serve(_) => unreachable!("handled above"),
    };
    if let Err(Failure::Engine(e)) = &result {
        ctx.log(&format!("failed ({}): {e}", e.code()));
    }
    ctx.work.close();
    result
}

/// The operations log. Command output stays clean: only `serve` echoes
/// log lines to the console.
fn open_log(global: &Global, quiet: bool) -> Result<LogSink, Error> {
    let path = global
        .log_file
        .clone()
        .unwrap_or_else(|| global.data_root.join(DEFAULT_LOG_NAME));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::Io { context: format!("cannot create {}", dir.display()), source: e })?;
    }
    LogSink::open(path, !quiet)
}

fn case_cmd(ctx: &mut Ctx, cmd: CaseCmd) -> CmdResult {
    match cmd {
        CaseCmd::Create { title, investigator } => {
            let investigator = investigator.unwrap_or_else(|| ctx.principal.clone());
            let case = ctx.work.create_case(&title, &investigator)?;
            ctx.log(&format!("case create -> case {}", case.id));
            ctx.emit(&case, || case.id.to_string())
        }
        CaseCmd::List => {
            let cases = ctx.work.cases()?;
            ctx.log(&format!("case list -> {} case(s)", cases.len()));
            ctx.emit(&cases, || {
                cases
                    .iter()
                    .map(|c| {
                        format!(
                            "{}\t{}\t{}\t{} evidence\n",
                            c.id,
                            c.title,
                            c.investigator,
                            c.evidences.len()
                        )
                    })
                    .collect()
            })
        }
        CaseCmd::Show { id } => {
            let case = ctx.work.case(id)?;
            ctx.log(&format!("case show {id}"));
            ctx.emit(&case, || describe_case(&case))
        }
        CaseCmd::FrontMatter { id, text } => {
            let current = ctx.work.case(id)?.front_matter;
            let case = ctx.work.set_front_matter(id, text.merged(current))?;
            ctx.log(&format!("case front-matter {id}"));
            ctx.emit(&case.front_matter, || format!("front matter saved for case {id}"))
        }
    }
}

fn describe_case(case: &ftklipse_core::Case) -> String {
    let mut s = format!(
        "case {}: {}\ninvestigator: {}\ncreated: {}\n",
        case.id,
        case.title,
        case.investigator,
        iso8601(case.created_at)
    );
    for e in &case.evidences {
        let parent = e.parent_evidence_id.map(|p| format!(" (from {p})")).unwrap_or_default();
        s.push_str(&format!(
            "  evidence {}: {} {} bytes sha256 {}{parent}\n",
            e.id, e.original_name, e.size_bytes, e.reference_hash
        ));
    }
    s
}

fn describe_evidence(e: &ftklipse_core::Evidence) -> String {
    let mut s = format!(
        "evidence {}: {}\ncase: {}\nsize: {} bytes\n{}: {}\nimported: {}\n",
        e.id,
        e.original_name,
        e.case_id,
        e.size_bytes,
        e.hash_algorithm,
        e.reference_hash,
        iso8601(e.imported_at)
    );
    if let Some(p) = e.parent_evidence_id {
        s.push_str(&format!("parent: {p}\n"));
    }
    s.push_str(&format!("notes: {}\ncustody events: {}\n", e.notes.len(), e.custody.len()));
    s
}

fn evidence_cmd(ctx: &mut Ctx, cmd: EvidenceCmd) -> CmdResult {
    match cmd {
        EvidenceCmd::Import { case_id, file, name } => {
            let evidence = match name {
                Some(n) => ctx.work.import_evidence_as(case_id, &file, &n, &ctx.principal)?,
                None => ctx.work.import_evidence(case_id, &file, &ctx.principal)?,
            };
            ctx.log(&format!(
                "evidence import {} into case {case_id} -> evidence {}",
                file.display(),
                evidence.id
            ));
            ctx.emit(&evidence, || evidence.id.to_string())
        }
        EvidenceCmd::Show { id } => {
            let evidence = ctx.work.evidence(id)?;
            ctx.log(&format!("evidence show {id}"));
            ctx.emit(&evidence, || describe_evidence(&evidence))
        }
        EvidenceCmd::Verify { id } => {
            let result = match ctx.work.verify_evidence(id, &ctx.principal) {
                Err(e @ Error::MissingEvidence(_)) => {
                    ctx.log(&format!("evidence verify {id} -> file missing"));
                    if !ctx.global.json {
                        writeln!(ctx.out, "MISMATCH evidence {id}: file missing")?;
                    }
                    return Err(e.into());
                }
                other => other?,
            };
            ctx.log(&format!("evidence verify {id} -> {}", if result.ok { "ok" } else { "MISMATCH" }));
            ctx.emit(&result, || {
                if result.ok {
                    format!("OK evidence {id} sha256 {}", result.actual_hash)
                } else {
                    format!(
                        "MISMATCH evidence {id}: expected {} actual {}",
                        result.expected_hash, result.actual_hash
                    )
                }
            })?;
            if result.ok {
                Ok(())
            } else {
                Err(Failure::Mismatch)
            }
        }
        EvidenceCmd::Render { id, format, offset, length, encoding } => {
            let evidence = ctx.work.evidence(id)?;
            let length = length.unwrap_or_else(|| RenderRequest::default_length(evidence.size_bytes, offset));
            let mut request = RenderRequest::new(format, offset, length);
            request.encoding = encoding;
            let text = render_evidence(&ctx.work, &evidence, &request)?;
            ctx.work.record_event(id, &ctx.principal, Operation::Viewed, request.describe())?;
            ctx.log(&format!("evidence render {id} {}", request.describe()));
            if ctx.global.json {
                let body = serde_json::json!({"evidence_id": id, "request": request.describe(), "text": text});
                ctx.emit(&body, String::new)
            } else {
                ctx.out.write_all(text.as_bytes())?;
                Ok(())
            }
        }
        EvidenceCmd::Extract { id, offset, length, name } => {
            let name = match name {
                Some(n) => n,
                None => default_extract_name(&ctx.work.evidence(id)?.original_name, offset, length),
            };
            let child = ctx.work.extract_region(id, offset, length, &name, &ctx.principal)?;
            ctx.log(&format!("evidence extract {id} [{offset}, +{length}) -> evidence {}", child.id));
            ctx.emit(&child, || child.id.to_string())
        }
        EvidenceCmd::Duplicate { id, name } => {
            let name = match name {
                Some(n) => n,
                None => default_duplicate_name(&ctx.work.evidence(id)?.original_name),
            };
            let child = ctx.work.duplicate_evidence(id, &name, &ctx.principal)?;
            ctx.log(&format!("evidence duplicate {id} -> evidence {}", child.id));
            ctx.emit(&child, || child.id.to_string())
        }
        EvidenceCmd::Custody { id } => {
            let events = ctx.work.list_custody(id)?;
            ctx.log(&format!("evidence custody {id}"));
            ctx.emit(&events, || {
                events
                    .iter()
                    .map(|e| {
                        format!(
                            "{}\t{}\t{}\t{}\t{}\n",
                            e.seq,
                            iso8601(e.timestamp),
                            e.principal,
                            e.operation,
                            e.detail
                        )
                    })
                    .collect()
            })
        }
    }
}

fn note_cmd(ctx: &mut Ctx, cmd: NoteCmd) -> CmdResult {
    match cmd {
        NoteCmd::Add { evidence, text, offset, length } => {
            let region = offset.zip(length).map(|(offset, length)| Region { offset, length });
            let note = ctx.work.add_note(evidence, &ctx.principal, &text, region)?;
            ctx.log(&format!("note add on evidence {evidence} -> note {}", note.id));
            ctx.emit(&note, || note.id.to_string())
        }
        NoteCmd::List { evidence } => {
            let notes = ctx.work.evidence(evidence)?.notes;
            ctx.log(&format!("note list {evidence}"));
            ctx.emit(&notes, || {
                notes
                    .iter()
                    .map(|n| {
                        let region = n
                            .region
                            .map(|r| format!(" [{}, +{})", r.offset, r.length))
                            .unwrap_or_default();
                        format!("{}\t{}\t{}{region}\t{}\n", n.id, iso8601(n.created_at), n.author, n.text)
                    })
                    .collect()
            })
        }
    }
}

fn load_tools(ctx: &Ctx) -> ToolRegistry {
    let (registry, diagnostics) = ToolRegistry::load_dir(&ctx.global.tools_dir);
    for d in diagnostics {
        ctx.log(&format!("tool manifest {} skipped: {}", d.path.display(), d.message));
    }
    registry
}

fn tool_cmd(ctx: &mut Ctx, cmd: ToolCmd) -> CmdResult {
    let registry = load_tools(ctx);
    match cmd {
        ToolCmd::List { tool_type, platform, batch, right_click } => {
            let filter = ToolFilter {
                tool_type,
                platform,
                in_batch_menu: batch,
                in_right_click_menu: right_click,
            };
            let tools = registry.list(&filter);
            ctx.log(&format!("tool list -> {} tool(s)", tools.len()));
            ctx.emit(&tools, || {
                tools
                    .iter()
                    .map(|t| format!("{}\t{}\t{}\t{}\n", t.id, t.friendly_name, t.tool_type.as_str(), t.platform))
                    .collect()
            })
        }
        ToolCmd::Run { tool, evidence, params, timeout } => {
            let manifest = registry
                .get(&tool)
                .ok_or_else(|| Error::Validation(format!("tool `{tool}` is not registered")))?;
            let target = ctx.work.evidence(evidence)?;
            let params: BTreeMap<String, String> = params.into_iter().collect();
            let mut plan = plan_invocation(manifest, &target, &params, ctx.work.data_root())?;
            if let Some(t) = timeout {
                plan.timeout_s = t;
            }
            let result = run_tool(&ctx.work, &plan, &ctx.principal)?;
            ctx.log(&format!(
                "tool run {tool} on evidence {evidence} -> exit {}",
                result.exit_code.map_or("none".to_string(), |c| c.to_string())
            ));
            ctx.emit(&result, || {
                let mut s = format!(
                    "tool {} on evidence {}: exit {}\n",
                    result.tool_id,
                    result.evidence_id,
                    result.exit_code.map_or("none".to_string(), |c| c.to_string())
                );
                if let Some(child) = result.output_evidence_id {
                    s.push_str(&format!("output imported as evidence {child}\n"));
                }
                let v = &result.post_verification;
                s.push_str(&format!("post-verification: {}\n", if v.ok { "OK" } else { "MISMATCH" }));
                s.push_str(&result.stdout);
                s
            })?;
            if result.post_verification.ok {
                Ok(())
            } else {
                Err(Failure::Mismatch)
            }
        }
    }
}

fn report_cmd(ctx: &mut Ctx, cmd: ReportCmd) -> CmdResult {
    let ReportCmd::Generate {
        case_id,
        format,
        title,
        evidence_ids,
        excerpts,
        no_notes,
        no_custody,
        text,
    } = cmd;
    let selection = ReportSelection {
        title,
        evidence_ids: (!evidence_ids.is_empty()).then_some(evidence_ids),
        excerpts,
        include_notes: !no_notes,
        include_custody: !no_custody,
    };
    let front_matter = if text.is_empty() {
        None
    } else {
        Some(text.merged(ctx.work.case(case_id)?.front_matter))
    };
    let exported = export_report(
        &ctx.work,
        case_id,
        &format,
        &selection,
        front_matter,
        &ctx.principal,
        &ctx.global.latex_bin,
    )?;
    ctx.log(&format!("report generate case {case_id} {format} -> {}", exported.path.display()));
    let body = serde_json::json!({
        "path": exported.path,
        "media_type": exported.media_type,
        "spec": exported.spec,
    });
    ctx.emit(&body, || exported.path.display().to_string())
}

fn serve(global: &Global, principal: String, args: ServeArgs, out: &mut dyn Write) -> CmdResult {
    let log = Arc::new(open_log(global, false)?);
    let mut config = ftklipse_server::ServiceConfig::new(&global.data_root, &global.tools_dir, &principal);
    config.bind_address = args.bind;
    config.ui_dir = args.ui_dir;
    config.latex_bin = global.latex_bin.clone();
    config.adapter = global.adapter;
    config.log = Some(log);
    let result = ftklipse_server::serve_until_interrupted(config, |addr| {
        let _ = writeln!(out, "listening on http://{addr}");
        let _ = out.flush();
    });
    result.map_err(|e| match e {
        ftklipse_server::ServiceError::Engine(e) => Failure::Engine(e),
        other => Failure::Engine(Error::Unavailable(other.to_string())),
    })
}
