//! Run records and CSV tables.

use std::collections::BTreeMap;
use std::io::Write;

use pinning_core::estimate::PoolEstimate;
use serde::{Serialize, Serializer};

use crate::config::ExperimentConfig;
use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Standard error of an estimate, or the tag `"exact"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Uncertainty {
    Exact,
    StdError(f64),
}

impl Serialize for Uncertainty {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Uncertainty::Exact => s.serialize_str("exact"),
            Uncertainty::StdError(v) => s.serialize_f64(*v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub std_error: Uncertainty,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<f64>,
}

impl Quantity {
    pub fn exact(name: impl Into<String>, value: f64) -> Self {
        Quantity {
            name: name.into(),
            value,
            std_error: Uncertainty::Exact,
            baseline: None,
        }
    }

    pub fn estimate(name: impl Into<String>, est: &PoolEstimate) -> Self {
        Quantity {
            name: name.into(),
            value: est.mean,
            std_error: Uncertainty::StdError(est.std_error),
            baseline: None,
        }
    }

    pub fn with_baseline(mut self, baseline: f64) -> Self {
        self.baseline = Some(baseline);
        self
    }
}

/// Numeric or text CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

/// One scan axis: a header and one row per grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width mismatch in table {}",
            self.name
        );
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// CSV with `#` provenance lines ahead of the header.
    pub fn write_csv<W: Write>(&self, mut out: W, seed: u64, config_sha256: &str) -> Result<()> {
        writeln!(out, "# pinninglab {VERSION}")?;
        writeln!(out, "# seed {seed}")?;
        writeln!(out, "# config-sha256 {config_sha256}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self, seed: u64, config_sha256: &str) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, seed, config_sha256)?;
        Ok(buf)
    }
}

/// The JSON document written for each run.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub version: &'static str,
    pub experiment: &'static str,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub estimates: Vec<Quantity>,
    /// Constants the theory only asserts to exist, measured over the
    /// computed horizon. Empirical, not rigorous.
    pub empirical_constants: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn passed(&self) -> bool {
        self.flags.values().all(|&v| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncertainty_tags() {
        let q = Quantity::exact("x", 1.5);
        assert_eq!(
            serde_json::to_string(&q).unwrap(),
            r#"{"name":"x","value":1.5,"std_error":"exact"}"#
        );
        let est = PoolEstimate::from_samples(&[1.0, 3.0], 0, "t");
        let q = Quantity::estimate("y", &est).with_baseline(2.0);
        assert_eq!(
            serde_json::to_string(&q).unwrap(),
            r#"{"name":"y","value":2.0,"std_error":1.0,"baseline":2.0}"#
        );
    }

    #[test]
    fn csv_has_provenance() {
        let mut t = Table::new("grid", &["h", "f", "ok"]);
        t.push(vec![0.5.into(), 1e-3.into(), true.into()]);
        let text = String::from_utf8(t.to_csv_bytes(9, "abc").unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "# seed 9");
        assert_eq!(lines[2], "# config-sha256 abc");
        assert_eq!(lines[3], "h,f,ok");
        assert_eq!(lines[4], "5e-1,1e-3,true");
    }
}
