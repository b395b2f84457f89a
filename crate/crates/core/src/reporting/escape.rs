//! Escaping of case-derived text for LaTeX and HTML output.

/// Escapes text for LaTeX body or `alltt` content.
///
/// The ten special characters become control symbols or brace-terminated
/// macros. Anything outside printable ASCII becomes `\uchar{XXXX}` (defined
/// in the document preamble) so the output compiles with any TeX engine and
/// font setup. Newlines and tabs become spaces; use [`latex_paragraphs`] to
/// keep paragraph breaks.
pub fn escape_latex(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + text.len() / 4);
    for c in text.chars() {
        match c {
            '#' | '$' | '%' | '&' | '_' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            '~' => out.push_str("\\textasciitilde{}"),
            '^' => out.push_str("\\textasciicircum{}"),
            '\\' => out.push_str("\\textbackslash{}"),
            '\n' | '\t' | '\r' => out.push(' '),
            ' '..='~' => out.push(c),
            other => {
                out.push_str(&format!("\\uchar{{{:04X}}}", other as u32));
            }
        }
    }
    out
}

/// Escapes free text, keeping blank-line paragraph breaks.
pub fn latex_paragraphs(text: &str) -> String {
    let normalized = text.replace("\r\n", "\n");
    normalized
        .split("\n\n")
        .map(|p| escape_latex(p.trim()))
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join("\n\n")
}

pub fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}
