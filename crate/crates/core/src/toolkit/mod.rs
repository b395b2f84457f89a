//! External tool plugins.
//!
//! Tools are registered by dropping a `*.tool` manifest into the tools
//! directory; nothing else needs to change. A manifest describes the command
//! to run, which menus the tool appears in, and the form of parameters it
//! accepts. Running a tool never gives it more than a path to the evidence,
//! and the evidence is re-hashed afterwards to show the tool left it intact.

mod exec;
mod manifest;
mod registry;

pub use exec::{
    current_platform, plan_invocation, plan_invocation_on, run_tool, InvocationPlan, RunOutcome,
    ToolRunResult, DEFAULT_TIMEOUT_S, OUTPUT_CAP_BYTES, TOOL_OUTPUT_DIR,
};
pub use manifest::{
    parse_manifest, parse_template, ParamKind, ParamSpec, Placeholder, Platform, Segment,
    ToolManifest, ToolType,
};
pub use registry::{scan_tool_dir, ScanDiagnostic, ScanReport, ToolFilter, ToolRegistry, MANIFEST_EXTENSION};
