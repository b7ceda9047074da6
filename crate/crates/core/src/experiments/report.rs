use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{ExperimentConfig, ExperimentError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(label: &str, passed: bool, detail: String) -> Self {
        Check { label: label.to_string(), passed, detail }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    /// Cells are numbers or bare labels; nothing needs quoting.
    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Shortest representation that round-trips.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub name: String,
    pub table: CsvTable,
    pub checks: Vec<Check>,
    pub config_hash: String,
    pub seed: u64,
}

impl ExperimentReport {
    pub fn new(cfg: &ExperimentConfig, table: CsvTable, checks: Vec<Check>) -> Self {
        ExperimentReport { name: cfg.name.clone(), table, checks, config_hash: cfg.hash(), seed: cfg.seed }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Metadata comment, header and rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# experiment={} config_sha256={} seed={}", self.name, self.config_hash, self.seed).unwrap();
        s + &self.table.render()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), ExperimentError> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            writeln!(s, "[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.label, c.detail).unwrap();
        }
        s
    }
}
