//! Run reports and their CSV / JSON serializations.
//!
//! Floats are written in shortest round-trip form, so a report parses back
//! to exactly the values it was built from and reruns are byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::ExponentFit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Bool(bool),
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Bool(b) => b.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format!("{x:?}"),
            Cell::Text(t) => t.clone(),
        }
    }

    /// Inverse of [`Cell::render`]. Text that looks like a number or a boolean
    /// reads back as one.
    pub fn parse_field(s: &str) -> Cell {
        match s {
            "true" => return Cell::Bool(true),
            "false" => return Cell::Bool(false),
            _ => {}
        }
        let numeric_shape = s.contains(['.', 'e', 'E']) || matches!(s, "inf" | "-inf" | "NaN");
        if !numeric_shape {
            if let Ok(i) = s.parse::<i64>() {
                return Cell::Int(i);
            }
        } else if let Ok(x) = s.parse::<f64>() {
            return Cell::Num(x);
        }
        Cell::Text(s.to_string())
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl From<&ExponentFit> for FitSummary {
    fn from(f: &ExponentFit) -> Self {
        FitSummary {
            slope: f.slope,
            intercept: f.intercept,
            slope_stderr: f.slope_stderr,
            r_squared: f.r_squared,
            points: f.x.len(),
        }
    }
}

/// A declared acceptance check: |value − target| ≤ tolerance, or a one-sided
/// bound when `relation` says so.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// |value − target| ≤ tolerance
    Within,
    /// value ≤ target + tolerance
    AtMost,
    /// value ≥ target − tolerance
    AtLeast,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, target: f64, tolerance: f64, relation: Relation) -> Self {
        let passed = match relation {
            Relation::Within => (value - target).abs() <= tolerance,
            Relation::AtMost => value <= target + tolerance,
            Relation::AtLeast => value >= target - tolerance,
        };
        Check {
            name: name.into(),
            value,
            target,
            tolerance,
            relation,
            passed,
        }
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self::new(name, value, target, tolerance, Relation::Within)
    }

    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value, bound, 0.0, Relation::AtMost)
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value, bound, 0.0, Relation::AtLeast)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// The resolved configuration the run used.
    pub config: serde_json::Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub fits: BTreeMap<String, FitSummary>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Only recorded on request: timing would break byte-identical reruns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl RunReport {
    pub fn new(subcommand: &str, config: serde_json::Value, columns: &[&str]) -> Self {
        RunReport {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fits: BTreeMap::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            wall_clock_seconds: None,
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn emit_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io {
            path: "<csv>".into(),
            message: e.to_string(),
        };
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io {
            path: "<csv>".into(),
            message: e.to_string(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// Pretty JSON with keys sorted at every level.
    pub fn emit_json(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Io {
            path: "<json>".into(),
            message: e.to_string(),
        })?;
        let mut s = serde_json::to_string_pretty(&value).expect("values serialize");
        s.push('\n');
        Ok(s)
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Io {
            path: "<json>".into(),
            message: e.to_string(),
        })
    }

    /// Columns and rows back from CSV text.
    pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<Cell>>)> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let io = |e: csv::Error| Error::Io {
            path: "<csv>".into(),
            message: e.to_string(),
        };
        let columns = r.headers().map_err(io)?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(io)?.iter().map(Cell::parse_field).collect());
        }
        Ok((columns, rows))
    }

    /// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.json`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        let io = |p: &Path, e: std::io::Error| Error::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        };
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        fs::write(&csv_path, self.emit_csv()?).map_err(|e| io(&csv_path, e))?;
        fs::write(&json_path, self.emit_json()?).map_err(|e| io(&json_path, e))?;
        Ok((csv_path, json_path))
    }
}

/// Writes an auxiliary two-column-or-more table as CSV.
pub fn write_table(path: &Path, columns: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let mut report = RunReport::new("", serde_json::Value::Null, columns);
    report.rows = rows.to_vec();
    let text = report.emit_csv()?;
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
    }
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_report(seed: u64) -> RunReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ncols = rng.random_range(1..6);
        let columns: Vec<String> = (0..ncols).map(|i| format!("c{i}")).collect();
        let refs: Vec<&str> = columns.iter().map(String::as_str).collect();
        let mut r = RunReport::new("coarea", serde_json::json!({"seed": seed, "s": 1.25}), &refs);
        for _ in 0..rng.random_range(0..8) {
            let row = (0..ncols)
                .map(|_| match rng.random_range(0..4) {
                    0 => Cell::Bool(rng.random()),
                    1 => Cell::Int(rng.random_range(-1000..1000)),
                    2 => Cell::Num((rng.random::<f64>() - 0.5) * 10f64.powi(rng.random_range(-20..20))),
                    _ => Cell::Text(format!("k{}, \"q\"", rng.random_range(0..100))),
                })
                .collect();
            r.push_row(row);
        }
        r.fits.insert(
            "slope".into(),
            FitSummary {
                slope: rng.random(),
                intercept: -rng.random::<f64>(),
                slope_stderr: 1e-3 * rng.random::<f64>(),
                r_squared: rng.random(),
                points: 5,
            },
        );
        r.checks.push(Check::within("x", rng.random(), 0.5, 0.25));
        r.notes.push(format!("note {seed}"));
        r
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn emit_parse_round_trip(seed in 0u64..1_000_000) {
            let r = random_report(seed);
            prop_assert_eq!(RunReport::parse_json(&r.emit_json().unwrap()).unwrap(), r.clone());
            let (cols, rows) = RunReport::parse_csv(&r.emit_csv().unwrap()).unwrap();
            prop_assert_eq!(cols, r.columns.clone());
            prop_assert_eq!(rows, r.rows.clone());
        }
    }

    #[test]
    fn empty_report() {
        let r = RunReport::new("kernel-bound", serde_json::json!({}), &["delta", "k"]);
        assert_eq!(r.emit_csv().unwrap(), "delta,k\r\n");
        let back = RunReport::parse_json(&r.emit_json().unwrap()).unwrap();
        assert!(back.rows.is_empty());
        assert!(back.all_passed());
    }

    #[test]
    fn one_row_one_line() {
        let mut r = RunReport::new("coarea", serde_json::json!({}), &["lambda", "volume"]);
        r.push_row(vec![1.0.into(), std::f64::consts::PI.into()]);
        assert_eq!(r.emit_csv().unwrap(), "lambda,volume\r\n1.0,3.141592653589793\r\n");
    }

    #[test]
    fn json_keys_are_sorted() {
        let r = random_report(3);
        let text = r.emit_json().unwrap();
        let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("checks") < pos("columns") && pos("columns") < pos("config") && pos("subcommand") < pos("tool"));
    }

    #[test]
    fn checks() {
        assert!(Check::within("a", 1.05, 1.0, 0.1).passed);
        assert!(!Check::within("a", 1.2, 1.0, 0.1).passed);
        assert!(Check::at_most("b", 0.5, 1.0).passed);
        assert!(!Check::at_least("c", 0.5, 1.0).passed);
    }
}
