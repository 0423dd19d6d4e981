//! Versioned check reports and their text and json renderings.

use serde::{Deserialize, Serialize};
use std::fmt::Write;

pub const SCHEMA: &str = "acgeom-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

impl Comparison {
    fn symbol(self) -> &'static str {
        match self {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub check_name: String,
    /// Residual or measured value; absent when the check could not be evaluated.
    pub value: Option<f64>,
    pub tolerance: f64,
    pub cmp: Comparison,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Row {
    fn new(name: impl Into<String>, value: Option<f64>, tolerance: f64, cmp: Comparison) -> Self {
        let pass = match (value, cmp) {
            (Some(v), Comparison::AtMost) => v <= tolerance,
            (Some(v), Comparison::AtLeast) => v >= tolerance,
            (None, _) => false,
        };
        Row { check_name: name.into(), value: value.filter(|v| v.is_finite()), tolerance, cmp, pass, detail: None }
    }

    /// Passes iff `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Row::new(name, Some(value), tolerance, Comparison::AtMost)
    }

    /// Passes iff `value >= bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Row::new(name, Some(value), bound, Comparison::AtLeast)
    }

    /// A failed row carrying an error message.
    pub fn error(name: impl Into<String>, message: impl ToString) -> Self {
        Row::new(name, None, 0.0, Comparison::AtMost).with_detail(message)
    }

    pub fn with_detail(mut self, detail: impl ToString) -> Self {
        self.detail = Some(detail.to_string());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub fixture: String,
    pub rows: Vec<Row>,
    /// Command-specific payload (coefficient families, scale ladders, reported variants).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
    /// Seconds; only recorded on request so that reports stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl Report {
    pub fn new(command: impl Into<String>, fixture: impl Into<String>) -> Self {
        Report {
            schema: SCHEMA.to_string(),
            command: command.into(),
            fixture: fixture.into(),
            rows: Vec::new(),
            data: None,
            wall_time: None,
        }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Column-aligned table; an empty report renders the header only.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} on {}\n", self.schema, self.command, self.fixture);
        let header = ["check", "value", "bound", "result"];
        let cells: Vec<[String; 4]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.check_name.clone(),
                    r.value.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}")),
                    format!("{} {:.1e}", r.cmp.symbol(), r.tolerance),
                    if r.pass { "PASS" } else { "FAIL" }.to_string(),
                ]
            })
            .collect();
        let mut width = header.map(str::len);
        for c in &cells {
            for (w, s) in width.iter_mut().zip(c) {
                *w = (*w).max(s.len());
            }
        }
        let line = |out: &mut String, c: [&str; 4], detail: Option<&str>| {
            let mut s = format!(
                "{:<w0$}  {:>w1$}  {:<w2$}  {}",
                c[0],
                c[1],
                c[2],
                c[3],
                w0 = width[0],
                w1 = width[1],
                w2 = width[2]
            );
            if let Some(d) = detail {
                s.push_str("  ");
                s.push_str(d);
            }
            writeln!(out, "{}", s.trim_end()).unwrap();
        };
        line(&mut out, header, None);
        for (c, r) in cells.iter().zip(&self.rows) {
            line(&mut out, [&c[0], &c[1], &c[2], &c[3]], r.detail.as_deref());
        }
        if let Some(t) = self.wall_time {
            writeln!(out, "wall time {t:.3} s").unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        let r = Report::new("validate", "x.json");
        assert_eq!(r.to_text().lines().count(), 2);
        assert!(r.passed());
    }

    #[test]
    fn single_passing_row() {
        let mut r = Report::new("validate", "x.json");
        r.push(Row::at_most("J^2 = -I", 0.0, 1e-10));
        let text = r.to_text();
        let rows: Vec<&str> = text.lines().skip(2).collect();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].ends_with("PASS"));
    }

    #[test]
    fn pass_follows_the_comparison() {
        assert!(Row::at_most("a", 1e-11, 1e-10).pass);
        assert!(!Row::at_most("a", 1e-9, 1e-10).pass);
        assert!(Row::at_least("s", 3.0, 2.8).pass);
        assert!(!Row::at_least("s", 2.0, 2.8).pass);
        assert!(!Row::at_most("nan", f64::NAN, 1.0).pass);
        assert!(!Row::error("e", "boom").pass);
    }

    #[test]
    fn json_round_trip() {
        let mut r = Report::new("curvature", "fix_b.json");
        r.push(Row::at_most("x", 3.3306690738754696e-16, 1e-10));
        r.push(Row::at_least("slope", 2.9987654321, 2.8).with_detail("ladder 1, 1/2"));
        r.push(Row::error("setup", "no metric"));
        r.data = Some(serde_json::json!({"c": [0.05, 1e-17]}));
        r.wall_time = Some(0.25);
        assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
    }
}
