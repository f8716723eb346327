//! CSV tables and the run manifest.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Shortest round-trip text of `x`, in exponent form outside `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// A value that can fill a CSV cell.
pub trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        fmt_f64(*self)
    }
}

impl Cell for usize {
    fn cell(&self) -> String {
        self.to_string()
    }
}

impl Cell for bool {
    fn cell(&self) -> String {
        self.to_string()
    }
}

impl Cell for String {
    fn cell(&self) -> String {
        self.clone()
    }
}

impl Cell for &str {
    fn cell(&self) -> String {
        self.to_string()
    }
}

/// An in-memory CSV table.
#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    rows: Vec<String>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push<I, T>(&mut self, row: I)
    where
        I: IntoIterator<Item = T>,
        T: Cell,
    {
        let cells: Vec<String> = row.into_iter().map(|c| c.cell()).collect();
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells.join(","));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn render(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }
}

/// A file other than a CSV table.
#[derive(Clone, Debug)]
pub struct RawFile {
    pub name: String,
    pub contents: String,
}

/// Everything a command produces.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub files: Vec<RawFile>,
    pub results: serde_json::Map<String, Value>,
    /// Cross-checks that failed; a non-empty list makes the run exit non-zero.
    pub failed_checks: Vec<String>,
}

impl Outcome {
    pub fn result<T: Serialize>(&mut self, key: &str, value: T) {
        self.results.insert(key.into(), serde_json::to_value(value).expect("result serializes"));
    }

    pub fn merge(&mut self, prefix: &str, other: Outcome) {
        self.tables.extend(other.tables);
        self.files.extend(other.files);
        self.results.insert(prefix.into(), Value::Object(other.results));
        self.failed_checks.extend(other.failed_checks);
    }
}

#[derive(Serialize)]
struct ArtifactEntry<'a> {
    file: &'a str,
    columns: Option<&'a [String]>,
    rows: Option<usize>,
}

/// Writes the tables, the extra files and `manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, outcome: &Outcome, mut manifest: serde_json::Map<String, Value>) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut entries = Vec::new();
    for t in &outcome.tables {
        let file = format!("{}.csv", t.name);
        std::fs::write(dir.join(&file), t.render()).with_context(|| format!("writing {file}"))?;
        entries.push(serde_json::to_value(ArtifactEntry { file: &file, columns: Some(&t.columns), rows: Some(t.len()) })?);
    }
    for f in &outcome.files {
        std::fs::write(dir.join(&f.name), &f.contents).with_context(|| format!("writing {}", f.name))?;
        entries.push(serde_json::to_value(ArtifactEntry { file: &f.name, columns: None, rows: None })?);
    }
    manifest.insert("artifacts".into(), Value::Array(entries));
    manifest.insert("results".into(), Value::Object(outcome.results.clone()));
    manifest.insert("failed_checks".into(), serde_json::to_value(&outcome.failed_checks)?);
    let text = serde_json::to_string_pretty(&Value::Object(manifest))? + "\n";
    std::fs::write(dir.join("manifest.json"), text).context("writing manifest.json")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_table() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push([1.5, 2.0]);
        t.push([f64::NAN, 3e-7]);
        assert_eq!(t.render(), "a,b\n1.5,2\nNaN,3e-7\n");
        assert_eq!(fmt_f64(0.25), "0.25");
        assert_eq!(fmt_f64(-1.5e20), "-1.5e20");
    }
}
