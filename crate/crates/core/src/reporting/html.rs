use std::fmt::Write as _;

use super::escape::escape_html as esc;
use super::{ReportGenerator, ReportModel};
use crate::casework::CustodyEvent;
use crate::time::iso8601;

/// Self-contained HTML report, also used for in-app previews.
#[derive(Debug, Clone, Copy, Default)]
pub struct HtmlGenerator;

const STYLE: &str = "body{font-family:sans-serif;max-width:60em;margin:2em auto;}\
table{border-collapse:collapse;}td,th{border:1px solid #999;padding:2px 6px;vertical-align:top;}\
pre.hex{font-size:85%;background:#f4f4f4;padding:.5em;}\
.flag{font-weight:bold;}";

fn paragraphs(out: &mut String, text: &str) {
    let text = text.replace("\r\n", "\n");
    let mut any = false;
    for p in text.split("\n\n").map(str::trim).filter(|p| !p.is_empty()) {
        let _ = writeln!(out, "<p>{}</p>", esc(p));
        any = true;
    }
    if !any {
        out.push_str("<p><em>None provided.</em></p>\n");
    }
}

impl ReportGenerator for HtmlGenerator {
    fn format_id(&self) -> &'static str {
        "html"
    }

    fn file_extension(&self) -> &'static str {
        "html"
    }

    fn media_type(&self) -> &'static str {
        "text/html; charset=utf-8"
    }

    fn render(&self, model: &ReportModel<'_>) -> String {
        let spec = model.spec;
        let case = model.case;
        let mut out = String::new();
        out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
        let _ = writeln!(out, "<title>{}</title>", esc(&spec.title));
        let _ = writeln!(out, "<style>{STYLE}</style>\n</head>\n<body>");
        let _ = writeln!(out, "<header>\n<h1>{}</h1>", esc(&spec.title));
        out.push_str("<table class=\"case\">\n");
        let _ = writeln!(out, "<tr><th>Case</th><td>{}</td></tr>", case.id);
        let _ = writeln!(out, "<tr><th>Case title</th><td>{}</td></tr>", esc(&case.title));
        let _ = writeln!(out, "<tr><th>Investigator</th><td>{}</td></tr>", esc(&case.investigator));
        let _ = writeln!(out, "<tr><th>Opened</th><td>{}</td></tr>", iso8601(case.created_at));
        let _ = writeln!(out, "<tr><th>Generated</th><td>{}</td></tr>", iso8601(spec.generated_at));
        out.push_str("</table>\n</header>\n");

        out.push_str("<section class=\"front\" id=\"executive-summary\">\n<h2>Executive Summary</h2>\n");
        paragraphs(&mut out, &spec.front_matter.executive_summary);
        out.push_str("</section>\n<section class=\"front\" id=\"introduction\">\n<h2>Introduction</h2>\n");
        paragraphs(&mut out, &spec.front_matter.introduction);
        out.push_str("</section>\n");

        for section in &model.sections {
            let e = section.evidence;
            let _ = writeln!(out, "<section class=\"evidence\" id=\"evidence-{}\">", e.id);
            let _ = writeln!(out, "<h2>Evidence {}: {}</h2>", e.id, esc(&e.original_name));
            out.push_str("<table class=\"meta\">\n");
            let _ = writeln!(out, "<tr><th>Original name</th><td>{}</td></tr>", esc(&e.original_name));
            let _ = writeln!(out, "<tr><th>Size</th><td>{} bytes</td></tr>", e.size_bytes);
            let _ = writeln!(out, "<tr><th>Hash algorithm</th><td>{}</td></tr>", esc(&e.hash_algorithm));
            let _ = writeln!(out, "<tr><th>Digest</th><td><code>{}</code></td></tr>", esc(&e.reference_hash));
            let _ = writeln!(out, "<tr><th>Imported</th><td>{}</td></tr>", iso8601(e.imported_at));
            if let Some(parent) = e.parent_evidence_id {
                let _ = writeln!(out, "<tr><th>Derived from</th><td>evidence {parent}</td></tr>");
            }
            out.push_str("</table>\n");

            for (ex, dump) in &section.excerpts {
                let caption = if ex.caption.is_empty() {
                    String::new()
                } else {
                    format!(": {}", esc(&ex.caption))
                };
                let _ = writeln!(
                    out,
                    "<h3>Excerpt{caption} (offset {}, {} bytes)</h3>",
                    ex.offset, ex.length
                );
                let _ = writeln!(out, "<pre class=\"hex\">{}</pre>", esc(dump));
            }

            if spec.include_notes {
                out.push_str("<h3>Notes</h3>\n");
                if section.notes.is_empty() {
                    out.push_str("<p><em>No notes.</em></p>\n");
                } else {
                    out.push_str("<ul class=\"notes\">\n");
                    for (note, overlaps) in &section.notes {
                        let region = note
                            .region
                            .map(|r| format!(" [bytes {}&ndash;{}]", r.offset, r.offset + r.length - 1))
                            .unwrap_or_default();
                        let flag = if *overlaps {
                            " <span class=\"flag\">(excerpted region)</span>"
                        } else {
                            ""
                        };
                        let _ = writeln!(
                            out,
                            "<li>Note {} by {} at {}{region}{flag}: {}</li>",
                            note.id,
                            esc(&note.author),
                            iso8601(note.created_at),
                            esc(&note.text)
                        );
                    }
                    out.push_str("</ul>\n");
                }
            }

            if spec.include_custody {
                out.push_str("<h3>Chain of Custody</h3>\n<table class=\"custody\">\n");
                out.push_str("<tr><th>#</th><th>Principal</th><th>Timestamp (UTC)</th><th>Operation</th><th>Detail</th></tr>\n");
                for ev in section.custody {
                    out.push_str(&custody_row(ev));
                    out.push('\n');
                }
                out.push_str("</table>\n");
            }
            out.push_str("</section>\n");
        }

        out.push_str("<section class=\"front\" id=\"conclusion\">\n<h2>Conclusion</h2>\n");
        paragraphs(&mut out, &spec.front_matter.conclusion);
        out.push_str("</section>\n</body>\n</html>\n");
        out
    }
}

pub fn custody_row(ev: &CustodyEvent) -> String {
    format!(
        "<tr class=\"event\"><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
        ev.seq,
        esc(&ev.principal),
        iso8601(ev.timestamp),
        ev.operation.as_str(),
        esc(&ev.detail)
    )
}
