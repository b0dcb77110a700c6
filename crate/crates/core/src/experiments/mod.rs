//! Experiment drivers producing plot-ready tables.

mod allocation;
mod validate;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use allocation::{
    coverage_sc, psnr_map_sfn, rbp_sweep, solve, Comparison, CoverageOutcome, PsnrMapOutcome, SolverChoice,
    StrategySummary,
};
pub use validate::{validate_approx, Validation, ValidationRow, GAP_TOLERANCE, SE_MULTIPLIER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            // Shortest representation that parses back to the same value.
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Text(v) => f.write_str(v),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u8> for Cell {
    fn from(v: u8) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Text(String::new()), Into::into)
    }
}

/// A table plus the inputs needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub id: String,
    /// Hex SHA-256 of the scenario.
    pub digest: String,
    pub seeds: Vec<(String, u64)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Wall-clock time; kept out of the CSV so reruns compare equal.
    #[serde(skip)]
    pub runtime: Duration,
}

impl ExperimentResult {
    pub fn new(id: &str, digest: &str, seeds: Vec<(String, u64)>, columns: &[&str]) -> Self {
        Self {
            id: id.to_string(),
            digest: digest.to_string(),
            seeds,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            runtime: Duration::ZERO,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// `#`-prefixed provenance lines followed by a headered CSV table.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# experiment: {}", self.id)?;
        writeln!(out, "# scenario-sha256: {}", self.digest)?;
        for (name, seed) in &self.seeds {
            writeln!(out, "# seed.{name}: {seed}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    /// Writes `<dir>/<id>.csv` and returns the path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.csv", self.id));
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut r = ExperimentResult::new("demo", "abc", vec![("mc".into(), 7)], &["t", "value", "note"]);
        r.push(vec![1usize.into(), 0.5.into(), "a,b".into()]);
        r.push(vec![2usize.into(), Cell::from(None::<f64>), "".into()]);
        let text = r.to_csv_string().unwrap();
        assert_eq!(
            text,
            "# experiment: demo\n# scenario-sha256: abc\n# seed.mc: 7\nt,value,note\n1,0.5,\"a,b\"\n2,,\n"
        );
        assert_eq!(r.column("value"), Some(1));
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 0.9999999999999999, 1e-300] {
            let s = Cell::Float(v).to_string();
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }
}
