//! Structured command reports with a deterministic canonical section.
//!
//! The canonical section depends only on the input file and flags; anything
//! nondeterministic (timings) lives in the separate diagnostics section.

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Structured,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    /// Deterministic for fixed inputs; keys are sorted.
    pub canonical: Value,
    /// Timings and other run-specific diagnostics.
    pub diagnostics: Value,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            command: command.to_string(),
            canonical: Value::Object(Map::new()),
            diagnostics: Value::Object(Map::new()),
        }
    }

    pub fn put<T: Serialize>(&mut self, key: &str, value: T) {
        if let Value::Object(map) = &mut self.canonical {
            map.insert(key.to_string(), serde_json::to_value(value).unwrap());
        }
    }

    pub fn diag<T: Serialize>(&mut self, key: &str, value: T) {
        if let Value::Object(map) = &mut self.diagnostics {
            map.insert(key.to_string(), serde_json::to_value(value).unwrap());
        }
    }

    /// The canonical section as rendered in text mode; used for
    /// byte-identity checks across runs.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("spinsym {} report\n", self.command));
        render_value(&self.canonical, 0, &mut out);
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Structured => serde_json::to_string_pretty(self).unwrap(),
            ReportFormat::Text => {
                let mut out = self.canonical_text();
                out.push_str("---- diagnostics (non-canonical) ----\n");
                render_value(&self.diagnostics, 0, &mut out);
                out
            }
        }
    }
}

fn render_value(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                match v {
                    Value::Object(m) if !m.is_empty() => {
                        out.push_str(&format!("{}{k}:\n", "  ".repeat(indent)));
                        render_value(v, indent + 1, out);
                    }
                    _ => {
                        out.push_str(&format!(
                            "{}{k}: {}\n",
                            "  ".repeat(indent),
                            compact(v)
                        ));
                    }
                }
            }
        }
        other => out.push_str(&format!("{}{}\n", "  ".repeat(indent), compact(other))),
    }
}

fn compact(value: &Value) -> String {
    serde_json::to_string(value).unwrap()
}
