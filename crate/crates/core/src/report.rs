//! Self-describing CSV artifacts.
//!
//! Every sweep writes one CSV whose `#`-prefixed header lines embed the
//! full configuration (and the artifact version), so a result file can be
//! interpreted and reproduced without its command line. Float fields use
//! the shortest round-trip representation; identical configurations
//! produce byte-identical files.

use std::fmt::Write as _;

/// An in-memory CSV with `# key: value` metadata lines.
#[derive(Clone, Debug, Default)]
pub struct CsvReport {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvReport {
    pub fn new(columns: &[&str]) -> Self {
        CsvReport {
            meta: vec![("version".into(), crate::artifact_version())],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, fields: &[&dyn std::fmt::Display]) -> &mut Self {
        assert_eq!(fields.len(), self.columns.len(), "row width mismatch");
        self.rows.push(fields.iter().map(|f| quote(&f.to_string())).collect());
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Quote a field when it would break the column structure.
fn quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}
