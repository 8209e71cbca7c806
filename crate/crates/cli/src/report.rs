//! Plot-ready CSV output: UTF-8, a leading block of `# key = value` comment
//! lines echoing the effective configuration, then a header row and data
//! rows.

use std::path::Path;

use crate::error::{CliError, Result};

/// Quotes a field only when it contains a delimiter, quote, or newline.
fn escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Renders comments + header + rows as CSV text.
pub fn render_csv(comments: &str, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for line in comments.lines() {
        if !line.is_empty() {
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "row width must match header");
        let encoded: Vec<String> = row.iter().map(|f| escape(f)).collect();
        out.push_str(&encoded.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(
    path: &Path,
    comments: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Other(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, render_csv(comments, header, rows))
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))
}

/// Fixed-precision float formatting used for metric columns, so identical
/// runs serialize identically.
pub fn fmt_metric(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        String::new()
    }
}
