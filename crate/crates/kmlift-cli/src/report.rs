use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cli::Format;

/// Report schema version, bumped on incompatible changes to the JSON layout.
pub const SCHEMA: u32 = 1;

/// A check that missed its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
}

/// Rows for CSV output. Commands without a natural table fall back to a
/// flattened (key, value) listing of `data`.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub passed: bool,
    pub failures: Vec<Failure>,
    pub data: Value,
    #[serde(skip)]
    pub table: Option<Table>,
    /// Human-readable lines; may include timings, so never serialized.
    #[serde(skip)]
    pub text: Vec<String>,
}

impl Report {
    pub fn new(command: &str, data: Value) -> Self {
        Report { schema: SCHEMA, command: command.into(), passed: true, failures: vec![], data, table: None, text: vec![] }
    }

    /// Records a check `value < tolerance`; NaN fails.
    pub fn check(&mut self, name: &str, value: f64, tolerance: f64) -> bool {
        let ok = value < tolerance;
        if !ok {
            self.fail(name, value, tolerance);
        }
        ok
    }

    /// Records a boolean check; failures carry value 1 against tolerance 0.
    pub fn require(&mut self, name: &str, ok: bool) -> bool {
        if !ok {
            self.fail(name, 1.0, 0.0);
        }
        ok
    }

    fn fail(&mut self, name: &str, value: f64, tolerance: f64) {
        self.passed = false;
        self.failures.push(Failure { check: name.into(), value, tolerance });
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.text.push(s.into());
    }

    pub fn with_table(mut self, t: Table) -> Self {
        self.table = Some(t);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn table_or_flat(&self) -> Table {
        if let Some(t) = &self.table {
            return t.clone();
        }
        let mut t = Table::new(&["key", "value"]);
        flatten("", &self.data, &mut t);
        t
    }

    pub fn to_csv(&self) -> Result<String, String> {
        let t = self.table_or_flat();
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(&t.header).map_err(|e| e.to_string())?;
        for r in &t.rows {
            w.write_record(r).map_err(|e| e.to_string())?;
        }
        String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
    }

    /// Writes to stdout; a closed pipe (`| head`) is not an error.
    pub fn print(&self, format: Format) {
        let body = match format {
            Format::Json => self.to_json() + "\n",
            Format::Text => self.to_string(),
        };
        let _ = std::io::stdout().lock().write_all(body.as_bytes());
    }

    pub fn write(&self, path: &Path) -> Result<(), String> {
        let body = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => self.to_json() + "\n",
            Some("csv") => self.to_csv()?,
            _ => return Err(format!("--out {}: extension must be .json or .csv", path.display())),
        };
        std::fs::write(path, body).map_err(|e| format!("--out {}: {e}", path.display()))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.text {
            writeln!(f, "{l}")?;
        }
        for x in &self.failures {
            writeln!(f, "failed: {} = {:.3e} (tolerance {:.1e})", x.check, x.value, x.tolerance)?;
        }
        writeln!(f, "{}: {}", self.command, if self.passed { "PASS" } else { "FAIL" })
    }
}

fn flatten(prefix: &str, v: &Value, t: &mut Table) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&join(prefix, k), x, t);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&join(prefix, &i.to_string()), x, t);
            }
        }
        Value::Array(a) => t.push(vec![prefix.into(), a.iter().map(scalar).collect::<Vec<_>>().join(" ")]),
        _ => t.push(vec![prefix.into(), scalar(v)]),
    }
}

fn join(prefix: &str, k: &str) -> String {
    if prefix.is_empty() {
        k.into()
    } else {
        format!("{prefix}.{k}")
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// A float as CSV text; `{}` prints the shortest round-trip form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flat_csv_lists_leaves() {
        let r = Report::new("x", json!({"a": 1, "b": {"c": [1.5, 2]}, "d": [{"e": "s"}]}));
        let csv = r.to_csv().unwrap();
        assert_eq!(csv, "key,value\na,1\nb.c,1.5 2\nd.0.e,s\n");
    }

    #[test]
    fn checks_record_failures() {
        let mut r = Report::new("x", json!({}));
        assert!(r.check("small", 1e-9, 1e-8));
        assert!(!r.check("nan", f64::NAN, 1.0));
        assert!(!r.require("flag", false));
        assert!(!r.passed);
        assert_eq!(r.failures.len(), 2);
        assert!(r.to_json().contains("\"check\": \"nan\""));
    }
}
