//! Pass/fail checks, plot-ready tables and the JSON summary.

use std::collections::BTreeMap;
use std::io::{self, Write};

use hvisc_core::solver::GridFunction;
use hvisc_core::Point;
use serde::Serialize;

/// Acceptance region for a measured value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    AtMost {
        limit: f64,
    },
    AtLeast {
        limit: f64,
    },
    /// Strictly greater.
    Above {
        limit: f64,
    },
    /// Strictly smaller.
    Below {
        limit: f64,
    },
    Between {
        lo: f64,
        hi: f64,
    },
    Near {
        target: f64,
        tol: f64,
    },
    /// Recorded only; any finite value passes.
    Finite,
}

impl Bound {
    pub fn admits(self, v: f64) -> bool {
        match self {
            Bound::AtMost { limit } => v <= limit,
            Bound::AtLeast { limit } => v >= limit,
            Bound::Above { limit } => v > limit,
            Bound::Below { limit } => v < limit,
            Bound::Between { lo, hi } => v >= lo && v <= hi,
            Bound::Near { target, tol } => (v - target).abs() <= tol,
            Bound::Finite => v.is_finite(),
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Bound::AtMost { limit } => write!(f, "<= {limit:e}"),
            Bound::AtLeast { limit } => write!(f, ">= {limit:e}"),
            Bound::Above { limit } => write!(f, "> {limit:e}"),
            Bound::Below { limit } => write!(f, "< {limit:e}"),
            Bound::Between { lo, hi } => write!(f, "in [{lo}, {hi}]"),
            Bound::Near { target, tol } => write!(f, "= {target:e} ± {tol:e}"),
            Bound::Finite => write!(f, "finite"),
        }
    }
}

/// One named criterion with its measured value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Non-finite values serialize as `null`.
    pub measured: f64,
    pub bound: Bound,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, bound: Bound) -> Self {
        Check { name: name.into(), passed: bound.admits(measured), measured, bound, witness: Vec::new(), note: None }
    }

    pub fn witness(mut self, points: &[Point]) -> Self {
        self.witness = points.iter().map(|p| [p.x, p.y, p.z]).collect();
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Numeric table written as CSV with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Everything an experiment produces besides its parameters.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub tables: Vec<Table>,
    /// Solver snapshots, exported as binary grids with a `z = 0` CSV slice.
    pub grids: Vec<(String, GridFunction)>,
}

impl Outcome {
    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }
}

/// JSON summary of one experiment run. Contains no timings or absolute
/// paths, so identical configurations give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub parameters: BTreeMap<String, String>,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Files written next to the summary, relative to the output directory.
    pub files: Vec<String>,
}

impl Summary {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summaries serialize") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert!(Bound::AtMost { limit: 1.0 }.admits(1.0));
        assert!(!Bound::Above { limit: 1.0 }.admits(1.0));
        assert!(Bound::Between { lo: 1.6, hi: 2.6 }.admits(2.0));
        assert!(Bound::Near { target: 5.0, tol: 0.0 }.admits(5.0));
        assert!(!Bound::AtLeast { limit: 0.0 }.admits(f64::NAN));
        assert!(!Bound::Finite.admits(f64::INFINITY));
    }

    #[test]
    fn nan_measurements_serialize_as_null() {
        let c = Check::new("x", f64::NAN, Bound::Finite);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"measured\":null"), "{json}");
        assert!(!c.passed);
    }

    #[test]
    fn csv_has_header() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec![1.0, 0.5]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,0.5\n");
    }
}
