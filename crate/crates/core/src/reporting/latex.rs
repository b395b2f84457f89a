use std::fmt::Write as _;

use super::escape::{escape_latex as esc, latex_paragraphs};
use super::{ReportGenerator, ReportModel};
use crate::time::iso8601;

/// LaTeX2e report. Only evidence sections use unstarred `\section`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LatexGenerator;

const PREAMBLE: &str = r"\documentclass[a4paper,10pt]{article}
\usepackage[T1]{fontenc}
\usepackage[margin=2cm]{geometry}
\usepackage{alltt}
\usepackage{longtable}
\usepackage{array}
\newcommand{\uchar}[1]{\texttt{[U+#1]}}
";

fn front_section(out: &mut String, heading: &str, body: &str) {
    let _ = writeln!(out, "\\section*{{{heading}}}");
    let text = latex_paragraphs(body);
    if text.is_empty() {
        out.push_str("\\emph{None provided.}\n\n");
    } else {
        let _ = writeln!(out, "{text}\n");
    }
}

impl ReportGenerator for LatexGenerator {
    fn format_id(&self) -> &'static str {
        "latex"
    }

    fn file_extension(&self) -> &'static str {
        "tex"
    }

    fn media_type(&self) -> &'static str {
        "application/x-latex"
    }

    fn render(&self, model: &ReportModel<'_>) -> String {
        let spec = model.spec;
        let case = model.case;
        let mut out = String::from(PREAMBLE);
        let _ = writeln!(out, "\\title{{{}}}", esc(&spec.title));
        let _ = writeln!(out, "\\author{{Investigator: {}}}", esc(&case.investigator));
        let _ = writeln!(out, "\\date{{Generated {}}}", iso8601(spec.generated_at));
        out.push_str("\\begin{document}\n\\maketitle\n\n");
        out.push_str("\\begin{tabular}{ll}\n");
        let _ = writeln!(out, "Case & {} \\\\", case.id);
        let _ = writeln!(out, "Case title & {} \\\\", esc(&case.title));
        let _ = writeln!(out, "Opened & {} \\\\", iso8601(case.created_at));
        let _ = writeln!(out, "Evidence items & {} \\\\", model.sections.len());
        out.push_str("\\end{tabular}\n\n");

        front_section(&mut out, "Executive Summary", &spec.front_matter.executive_summary);
        front_section(&mut out, "Introduction", &spec.front_matter.introduction);

        for section in &model.sections {
            let e = section.evidence;
            let _ = writeln!(out, "\\section{{Evidence {}: {}}}", e.id, esc(&e.original_name));
            out.push_str("\\begin{tabular}{>{\\bfseries}l p{12cm}}\n");
            let _ = writeln!(out, "Original name & {} \\\\", esc(&e.original_name));
            let _ = writeln!(out, "Size & {} bytes \\\\", e.size_bytes);
            let _ = writeln!(out, "Hash algorithm & {} \\\\", esc(&e.hash_algorithm));
            let _ = writeln!(out, "Digest & \\texttt{{\\small {}}} \\\\", esc(&e.reference_hash));
            let _ = writeln!(out, "Imported & {} \\\\", iso8601(e.imported_at));
            if let Some(parent) = e.parent_evidence_id {
                let _ = writeln!(out, "Derived from & evidence {parent} \\\\");
            }
            out.push_str("\\end{tabular}\n\n");

            for (ex, dump) in &section.excerpts {
                let caption = if ex.caption.is_empty() {
                    String::new()
                } else {
                    format!(": {}", esc(&ex.caption))
                };
                let _ = writeln!(
                    out,
                    "\\subsection*{{Excerpt{caption} (offset {}, {} bytes)}}",
                    ex.offset, ex.length
                );
                out.push_str("{\\footnotesize\n\\begin{alltt}\n");
                for line in dump.lines() {
                    out.push_str(&esc(line));
                    out.push('\n');
                }
                out.push_str("\\end{alltt}\n}\n\n");
            }

            if spec.include_notes {
                out.push_str("\\subsection*{Notes}\n");
                if section.notes.is_empty() {
                    out.push_str("\\emph{No notes.}\n\n");
                } else {
                    out.push_str("\\begin{itemize}\n");
                    for (note, overlaps) in &section.notes {
                        let region = note
                            .region
                            .map(|r| format!(" [bytes {}--{}]", r.offset, r.offset + r.length - 1))
                            .unwrap_or_default();
                        let flag = if *overlaps { " \\textbf{(excerpted region)}" } else { "" };
                        let _ = writeln!(
                            out,
                            "\\item Note {} by {} at {}{region}{flag}: {}",
                            note.id,
                            esc(&note.author),
                            iso8601(note.created_at),
                            esc(&note.text)
                        );
                    }
                    out.push_str("\\end{itemize}\n\n");
                }
            }

            if spec.include_custody {
                out.push_str("\\subsection*{Chain of Custody}\n");
                out.push_str("{\\small\n\\begin{longtable}{r p{2.4cm} p{3.9cm} p{2.6cm} p{6cm}}\n");
                out.push_str("\\# & Principal & Timestamp (UTC) & Operation & Detail \\\\\n\\hline\n\\endhead\n");
                for ev in section.custody {
                    out.push_str(&custody_row(ev));
                    out.push('\n');
                }
                out.push_str("\\end{longtable}\n}\n\n");
            }
        }

        front_section(&mut out, "Conclusion", &spec.front_matter.conclusion);
        out.push_str("\\end{document}\n");
        out
    }
}

/// One custody table row, without the trailing newline.
pub fn custody_row(ev: &crate::casework::CustodyEvent) -> String {
    format!(
        "{} & {} & {} & {} & {} \\\\",
        ev.seq,
        esc(&ev.principal),
        iso8601(ev.timestamp),
        esc(ev.operation.as_str()),
        esc(&ev.detail)
    )
}
