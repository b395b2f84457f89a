//! `*.tool` manifest documents.
//!
//! ```text
//! # strings.tool
//! id = strings
//! friendly_name = Strings
//! command = strings -n {param:minlen} {evidence_path}
//! type = analysis
//! platform = unix
//! in_right_click_menu = true
//! param = minlen|Minimum length|text|4
//! ```
//!
//! One `key = value` per line, `#` starts a comment line. `param` may repeat;
//! each is `key|label|kind|default` with kind one of `text`, `flag`, `path`.
//! A param with an empty default is required at invocation time.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToolType {
    Collection,
    Analysis,
    Other,
}

impl ToolType {
    pub const ALL: [ToolType; 3] = [ToolType::Collection, ToolType::Analysis, ToolType::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            ToolType::Collection => "collection",
            ToolType::Analysis => "analysis",
            ToolType::Other => "other",
        }
    }
}

impl FromStr for ToolType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ToolType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| manifest_err("type", format!("`{s}` is not one of collection, analysis, other")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Win,
    Unix,
}

impl Platform {
    pub fn as_str(self) -> &'static str {
        match self {
            Platform::Win => "win",
            Platform::Unix => "unix",
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Platform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "win" => Ok(Platform::Win),
            "unix" => Ok(Platform::Unix),
            other => Err(manifest_err("platform", format!("`{other}` is neither win nor unix"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Text,
    Flag,
    Path,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub key: String,
    pub label: String,
    pub kind: ParamKind,
    /// `None` marks a required parameter.
    pub default: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolManifest {
    pub id: String,
    pub name: String,
    pub friendly_name: String,
    pub command_template: String,
    pub tool_type: ToolType,
    pub parameter: Option<String>,
    pub output_file: Option<String>,
    pub category: Option<String>,
    pub platform: Platform,
    pub in_batch_menu: bool,
    pub in_right_click_menu: bool,
    pub param_form: Vec<ParamSpec>,
}

impl ToolManifest {
    pub fn param(&self, key: &str) -> Option<&ParamSpec> {
        self.param_form.iter().find(|p| p.key == key)
    }
}

/// A `{...}` reference inside a command or output-file template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Placeholder {
    EvidencePath,
    OutputPath,
    CaseDir,
    EvidenceId,
    ToolId,
    Param(String),
}

impl Placeholder {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "evidence_path" => Placeholder::EvidencePath,
            "output_path" => Placeholder::OutputPath,
            "case_dir" => Placeholder::CaseDir,
            "evidence_id" => Placeholder::EvidenceId,
            "tool_id" => Placeholder::ToolId,
            _ => Placeholder::Param(name.strip_prefix("param:")?.to_string()),
        })
    }
}

/// Piece of a template: literal text or a placeholder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Literal(String),
    Slot(Placeholder),
}

/// Splits a template token into literal and placeholder segments.
pub fn parse_template(field: &str, text: &str) -> Result<Vec<Segment>> {
    let mut segments = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        if open > 0 {
            segments.push(Segment::Literal(rest[..open].to_string()));
        }
        let after = &rest[open + 1..];
        let close = after
            .find('}')
            .ok_or_else(|| manifest_err(field, format!("unterminated placeholder in `{text}`")))?;
        let name = &after[..close];
        let slot = Placeholder::parse(name)
            .filter(|p| !matches!(p, Placeholder::Param(k) if k.is_empty()))
            .ok_or_else(|| manifest_err(field, format!("unknown placeholder `{{{name}}}`")))?;
        segments.push(Segment::Slot(slot));
        rest = &after[close + 1..];
    }
    if rest.contains('}') {
        return Err(manifest_err(field, format!("stray `}}` in `{text}`")));
    }
    if !rest.is_empty() {
        segments.push(Segment::Literal(rest.to_string()));
    }
    Ok(segments)
}

pub(crate) fn manifest_err(field: &str, message: impl Into<String>) -> Error {
    Error::Manifest {
        field: field.to_string(),
        message: message.into(),
    }
}

fn parse_bool(field: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(manifest_err(field, format!("`{other}` is not true or false"))),
    }
}

fn parse_param(value: &str) -> Result<ParamSpec> {
    let parts: Vec<&str> = value.split('|').map(str::trim).collect();
    let [key, label, kind, default] = parts[..] else {
        return Err(manifest_err("param", format!("`{value}` is not key|label|kind|default")));
    };
    if key.is_empty() || key.contains(['{', '}', ':']) || key.contains(char::is_whitespace) {
        return Err(manifest_err("param", format!("invalid parameter key `{key}`")));
    }
    let kind = match kind {
        "text" => ParamKind::Text,
        "flag" => ParamKind::Flag,
        "path" => ParamKind::Path,
        other => return Err(manifest_err("param", format!("unknown kind `{other}`"))),
    };
    if kind == ParamKind::Flag && !matches!(default, "" | "true" | "false") {
        return Err(manifest_err("param", format!("flag `{key}` default must be true or false")));
    }
    Ok(ParamSpec {
        key: key.to_string(),
        label: if label.is_empty() { key.to_string() } else { label.to_string() },
        kind,
        default: (!default.is_empty()).then(|| default.to_string()),
    })
}

pub fn parse_manifest(text: &str) -> Result<ToolManifest> {
    let mut seen = std::collections::HashSet::new();
    let mut fields = std::collections::HashMap::new();
    let mut params: Vec<ParamSpec> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            manifest_err(&format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "param" => {
                let spec = parse_param(value)?;
                if params.iter().any(|p| p.key == spec.key) {
                    return Err(manifest_err("param", format!("parameter `{}` declared twice", spec.key)));
                }
                params.push(spec);
            }
            "id" | "name" | "friendly_name" | "command" | "type" | "parameter" | "output_file"
            | "category" | "platform" | "in_batch_menu" | "in_right_click_menu" => {
                if !seen.insert(key) {
                    return Err(manifest_err(key, "declared more than once"));
                }
                fields.insert(key, value.to_string());
            }
            other => return Err(manifest_err(other, "unknown key")),
        }
    }

    let required = |key: &str| -> Result<String> {
        fields
            .get(key)
            .filter(|v| !v.is_empty())
            .cloned()
            .ok_or_else(|| manifest_err(key, "missing"))
    };
    let optional = |key: &str| fields.get(key).filter(|v| !v.is_empty()).cloned();

    let id = required("id")?;
    if id.contains(char::is_whitespace) || id.contains('/') {
        return Err(manifest_err("id", "must not contain whitespace or `/`"));
    }
    let command_template = required("command")?;
    let platform: Platform = required("platform")?.parse()?;
    let tool_type = match optional("type") {
        Some(t) => t.parse()?,
        None => ToolType::Other,
    };
    let flag = |key: &str| -> Result<bool> {
        optional(key).map_or(Ok(false), |v| parse_bool(key, &v))
    };
    let name = optional("name").unwrap_or_else(|| id.clone());
    let manifest = ToolManifest {
        friendly_name: optional("friendly_name").unwrap_or_else(|| name.clone()),
        name,
        command_template,
        tool_type,
        parameter: optional("parameter"),
        output_file: optional("output_file"),
        category: optional("category"),
        platform,
        in_batch_menu: flag("in_batch_menu")?,
        in_right_click_menu: flag("in_right_click_menu")?,
        param_form: params,
        id,
    };
    check_placeholders(&manifest)?;
    Ok(manifest)
}

/// Every placeholder must be one this manifest can fill.
fn check_placeholders(m: &ToolManifest) -> Result<()> {
    let tokens: Vec<&str> = m.command_template.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(manifest_err("command", "missing"));
    }
    if tokens[0].contains('{') {
        return Err(manifest_err("command", "the executable must be a literal"));
    }
    for token in &tokens {
        for seg in parse_template("command", token)? {
            match seg {
                Segment::Slot(Placeholder::OutputPath) if m.output_file.is_none() => {
                    return Err(manifest_err("command", "`{output_path}` used without `output_file`"));
                }
                Segment::Slot(Placeholder::Param(key)) if m.param(&key).is_none() => {
                    return Err(manifest_err("command", format!("`{{param:{key}}}` is not declared")));
                }
                _ => {}
            }
        }
    }
    if let Some(template) = &m.output_file {
        for seg in parse_template("output_file", template)? {
            match seg {
                Segment::Slot(Placeholder::EvidenceId | Placeholder::ToolId) | Segment::Literal(_) => {}
                Segment::Slot(Placeholder::Param(key)) if m.param(&key).is_some() => {}
                Segment::Slot(other) => {
                    return Err(manifest_err(
                        "output_file",
                        format!("placeholder {other:?} not allowed in output_file"),
                    ));
                }
            }
        }
    }
    Ok(())
}
