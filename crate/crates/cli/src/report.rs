use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::scenario::{Task, Tolerances};
use crate::CliError;

pub const CSV_HEADER: &str = "task,quantity,value,threshold,pass";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: ToolInfo,
    pub scenario: ScenarioInfo,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub tasks: Vec<TaskReport>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub name: Option<String>,
    /// SHA-256 of the scenario file bytes.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub tasks: usize,
    pub passed: usize,
    pub failed: usize,
    pub solver_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskCheck {
    pub name: String,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub index: usize,
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_label: Option<String>,
    pub values: BTreeMap<String, Value>,
    pub checks: Vec<TaskCheck>,
    pub notes: Vec<String>,
    pub solver_failures: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_s: Option<f64>,
}

impl TaskReport {
    fn label(&self) -> String {
        format!("{}:{}", self.index, self.task.kind())
    }
}

/// `x` rounded to 12 significant digits; non-finite values become `None`.
pub fn round12(x: f64) -> Option<f64> {
    if !x.is_finite() {
        return None;
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float");
    Some(r + 0.0)
}

/// Rounds every number inside a JSON value to 12 significant digits.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => round12(n.as_f64().unwrap()).map_or(Value::Null, Value::from),
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Number(n) => out.push((prefix.to_string(), n.to_string())),
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::Object(o) => {
            for (k, x) in o {
                flatten(&format!("{prefix}.{k}"), x, out);
            }
        }
        Value::Null | Value::String(_) => {}
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn num(x: Option<f64>) -> String {
    x.and_then(serde_json::Number::from_f64)
        .map(|n| n.to_string())
        .unwrap_or_default()
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.tasks.iter().all(|t| t.pass)
    }

    /// 0 all pass, 1 a check failed, 3 a solver failed.
    pub fn exit_code(&self) -> i32 {
        if self.summary.solver_failures > 0 {
            3
        } else if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn task(&self, index: usize) -> Option<&TaskReport> {
        self.tasks.get(index)
    }

    /// Canonical JSON: keys sorted, two-space indentation, trailing newline.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, CliError> {
        serde_json::from_str(s).map_err(|e| CliError::Input(format!("report: {e}")))
    }

    fn csv_rows(&self) -> Vec<[String; 5]> {
        let mut rows = Vec::new();
        for t in &self.tasks {
            let task = t.label();
            let mut leaves = Vec::new();
            for (k, v) in &t.values {
                flatten(k, v, &mut leaves);
            }
            for (q, v) in leaves {
                rows.push([task.clone(), q, v, String::new(), String::new()]);
            }
            for c in &t.checks {
                rows.push([task.clone(), c.name.clone(), num(c.value), num(c.threshold), c.pass.to_string()]);
            }
        }
        rows
    }

    /// Number of scalar quantities: numeric and boolean leaves of task values plus checks.
    pub fn scalar_count(&self) -> usize {
        self.csv_rows().len()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for row in self.csv_rows() {
            let fields: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
            s.push_str(&fields.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn render(r: &Report, format: Format) -> String {
    match format {
        Format::Json => r.to_json(),
        Format::Csv => r.to_csv(),
    }
}

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn emit_report(r: &Report, format: Format, out: &Path) -> Result<(), CliError> {
    write_atomic(out, &render(r, format))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round12(1.0 / 3.0), Some(0.333333333333));
        assert_eq!(round12(2.0 / 3.0), Some(0.666666666667));
        assert_eq!(round12(f64::NAN), None);
        assert_eq!(round12(0.0), Some(0.0));
        assert!(round12(-0.0).unwrap().is_sign_positive());
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
