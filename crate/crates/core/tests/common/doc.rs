//! Test-side readers for generated report documents.

/// Inverse of the LaTeX escaping rules, rejecting any special character that
/// appears unescaped.
pub fn unescape_latex(s: &str) -> Result<String, String> {
    let mut out = String::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some(sym @ ('#' | '$' | '%' | '&' | '_' | '{' | '}')) => out.push(sym),
                Some(first) if first.is_ascii_alphabetic() => {
                    let mut name = String::from(first);
                    while let Some(&n) = chars.peek() {
                        if !n.is_ascii_alphabetic() {
                            break;
                        }
                        name.push(n);
                        chars.next();
                    }
                    let mut arg = String::new();
                    if chars.next() != Some('{') {
                        return Err(format!("\\{name} without braces"));
                    }
                    for a in chars.by_ref() {
                        if a == '}' {
                            break;
                        }
                        arg.push(a);
                    }
                    match (name.as_str(), arg.as_str()) {
                        ("textasciitilde", "") => out.push('~'),
                        ("textasciicircum", "") => out.push('^'),
                        ("textbackslash", "") => out.push('\\'),
                        ("uchar", hex) => {
                            let code = u32::from_str_radix(hex, 16).map_err(|e| format!("uchar {hex}: {e}"))?;
                            out.push(char::from_u32(code).ok_or("bad code point")?);
                        }
                        _ => return Err(format!("unexpected command \\{name}{{{arg}}}")),
                    }
                }
                other => return Err(format!("bad escape after backslash: {other:?}")),
            },
            '#' | '$' | '%' | '&' | '_' | '{' | '}' | '~' | '^' => {
                return Err(format!("unescaped `{c}` in {s:?}"))
            }
            c if !(' '..='~').contains(&c) => return Err(format!("raw non-ASCII {c:?}")),
            c => out.push(c),
        }
    }
    Ok(out)
}

/// What LaTeX escaping is expected to preserve: line breaks become spaces.
pub fn latex_normal(s: &str) -> String {
    s.chars()
        .map(|c| if matches!(c, '\n' | '\t' | '\r') { ' ' } else { c })
        .collect()
}

pub fn unescape_html(s: &str) -> Result<String, String> {
    if s.contains('<') || s.contains('>') {
        return Err(format!("raw angle bracket in {s:?}"));
    }
    let mut out = String::new();
    let mut rest = s;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        let end = rest[i..].find(';').ok_or("unterminated entity")? + i;
        out.push(match &rest[i..=end] {
            "&amp;" => '&',
            "&lt;" => '<',
            "&gt;" => '>',
            "&quot;" => '"',
            "&#39;" => '\'',
            other => return Err(format!("unknown entity {other}")),
        });
        rest = &rest[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Text between `open` and the next `close`, for every occurrence.
pub fn between<'a>(doc: &'a str, open: &str, close: &str) -> Vec<&'a str> {
    let mut out = Vec::new();
    let mut rest = doc;
    while let Some(i) = rest.find(open) {
        let after = &rest[i + open.len()..];
        let j = after.find(close).expect("unclosed block");
        out.push(&after[..j]);
        rest = &after[j + close.len()..];
    }
    out
}

/// Custody rows of each LaTeX longtable, split into their five cells.
pub fn latex_custody_tables(doc: &str) -> Vec<Vec<Vec<String>>> {
    between(doc, "\\begin{longtable}", "\\end{longtable}")
        .into_iter()
        .map(|table| {
            let body = table.split("\\endhead\n").nth(1).expect("table head");
            body.lines()
                .map(|row| {
                    let row = row.strip_suffix(" \\\\").expect("row terminator");
                    let cells: Vec<String> = row.split(" & ").map(str::to_string).collect();
                    assert_eq!(cells.len(), 5, "{row}");
                    cells
                })
                .collect()
        })
        .collect()
}

/// Custody rows of each HTML custody table, cells still escaped.
pub fn html_custody_tables(doc: &str) -> Vec<Vec<Vec<String>>> {
    between(doc, "<table class=\"custody\">", "</table>")
        .into_iter()
        .map(|table| {
            between(table, "<tr class=\"event\">", "</tr>")
                .into_iter()
                .map(|row| between(row, "<td>", "</td>").into_iter().map(str::to_string).collect())
                .collect()
        })
        .collect()
}
