//! Machine-readable reports: checks, tables, JSON and CSV output.

use std::collections::BTreeMap;
use std::io::Write;

use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};
use serde_json::value::RawValue;

/// A float written with 17 significant digits; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Float(pub f64);

impl Float {
    pub fn text(self) -> Option<String> {
        self.0.is_finite().then(|| format!("{:.16e}", self.0))
    }
}

impl Serialize for Float {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.text() {
            Some(t) => RawValue::from_string(t).map_err(serde::ser::Error::custom)?.serialize(s),
            None => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// One verified identity: a measured residual against a tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// Label of the lemma, definition or theorem the check realizes.
    pub anchor: String,
    pub status: CheckStatus,
    pub residual: f64,
    pub tolerance: f64,
    pub note: Option<String>,
}

impl Check {
    /// Passes when `residual <= tolerance` (and the residual is finite).
    pub fn measured(name: &str, anchor: &str, residual: f64, tolerance: f64) -> Self {
        let status = if residual <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail };
        Check { name: name.into(), anchor: anchor.into(), status, residual, tolerance, note: None }
    }

    pub fn skipped(name: &str, anchor: &str, why: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            status: CheckStatus::Skipped,
            residual: f64::NAN,
            tolerance: f64::NAN,
            note: Some(why.into()),
        }
    }

    pub fn failed(name: &str, anchor: &str, tolerance: f64, why: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            status: CheckStatus::Fail,
            residual: f64::NAN,
            tolerance,
            note: Some(why.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

impl Serialize for Check {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("name", &self.name)?;
        m.serialize_entry("anchor", &self.anchor)?;
        m.serialize_entry("status", &self.status)?;
        m.serialize_entry("residual", &Float(self.residual))?;
        m.serialize_entry("tolerance", &Float(self.tolerance))?;
        if let Some(note) = &self.note {
            m.serialize_entry("note", note)?;
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Null,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => Float(*x).text().unwrap_or_default(),
            Cell::Text(t) => t.clone(),
            Cell::Null => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Float(x) => Float(*x).serialize(s),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Null => s.serialize_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct Rows<'a>(&'a [Vec<Cell>]);
        impl Serialize for Rows<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for r in self.0 {
                    seq.serialize_element(r)?;
                }
                seq.end()
            }
        }
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("columns", &self.columns)?;
        m.serialize_entry("rows", &Rows(&self.rows))?;
        m.end()
    }
}

/// Output of one tool invocation.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub task: String,
    pub config: serde_json::Value,
    pub checks: Vec<Check>,
    /// Named tables in deterministic (sorted) order.
    pub tables: BTreeMap<String, Table>,
    /// Free-form scalar results.
    pub values: BTreeMap<String, Cell>,
    pub timings: Option<BTreeMap<String, f64>>,
}

impl Report {
    pub fn new(task: &str, config: serde_json::Value) -> Self {
        Report {
            tool: "btriple".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            task: task.into(),
            config,
            ..Default::default()
        }
    }

    /// All non-skipped checks passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        s.push('\n');
        s
    }

    /// Writes the report as JSON, or every table as CSV (tables separated by a `# name` line).
    pub fn write<W: Write>(&self, mut out: W, format: Format) -> std::io::Result<()> {
        match format {
            Format::Json => out.write_all(self.to_json().as_bytes()),
            Format::Csv => {
                let single = self.tables.len() == 1;
                for (name, table) in &self.tables {
                    if !single {
                        writeln!(out, "# {name}")?;
                    }
                    table.write_csv(&mut out)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("tool", &self.tool)?;
        m.serialize_entry("version", &self.version)?;
        m.serialize_entry("task", &self.task)?;
        m.serialize_entry("status", if self.passed() { "pass" } else { "fail" })?;
        m.serialize_entry("config", &self.config)?;
        m.serialize_entry("checks", &self.checks)?;
        m.serialize_entry("values", &self.values)?;
        m.serialize_entry("tables", &self.tables)?;
        if let Some(t) = &self.timings {
            let t: BTreeMap<&String, Float> = t.iter().map(|(k, v)| (k, Float(*v))).collect();
            m.serialize_entry("timings", &t)?;
        }
        m.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_bit_exactly() {
        let xs = [0.1, 1.0 / 3.0, -2.382_097_877_890_841, 1e-300, 6.02e23, f64::MIN_POSITIVE, 0.0];
        for x in xs {
            let json = serde_json::to_string(&Float(x)).unwrap();
            let back: f64 = serde_json::from_str(&json).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{json}");
        }
        assert_eq!(serde_json::to_string(&Float(f64::NAN)).unwrap(), "null");
    }

    #[test]
    fn report_round_trip_and_status() {
        let mut r = Report::new("verify", serde_json::json!({"type": "interval"}));
        r.checks.push(Check::measured("a", "lem:green", 1.234_567_890_123_456_7e-13, 1e-10));
        r.checks.push(Check::skipped("b", "lem:dn", "not available"));
        assert!(r.passed());
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["status"], "pass");
        assert_eq!(v["checks"][0]["residual"].as_f64().unwrap(), 1.234_567_890_123_456_7e-13);
        assert!(v["checks"][1]["residual"].is_null());
        r.checks.push(Check::measured("c", "lem:dn", 1.0, 1e-10));
        assert!(!r.passed());
    }

    #[test]
    fn spectra_csv() {
        let mut t = Table::new(&["index", "eigenvalue", "multiplicity", "method"]);
        t.push(vec![0usize.into(), 2.5.into(), 1usize.into(), "dtn".into()]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "index,eigenvalue,multiplicity,method\n0,2.5000000000000000e0,1,dtn\n"
        );
    }
}
