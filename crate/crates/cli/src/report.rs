//! JSON reports and CSV tables.
//!
//! Every subcommand prints one report. Keys inside `config`, `results` and
//! `aggregate` come out sorted, so equal inputs give equal bytes. The only
//! wall-clock field, `elapsed_ms`, stays 0 unless `--timing` is passed.

use std::fs::File;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "catalyst-qlab/1";

/// JSON Schema for [`Report`].
pub const SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub experiment: String,
    pub config: Value,
    pub results: Vec<Value>,
    pub aggregate: Value,
    pub seed: u64,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn new(experiment: &str, config: Value, seed: u64) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            config,
            results: Vec::new(),
            aggregate: Value::Object(Default::default()),
            seed,
            elapsed_ms: 0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Rows for `--csv`, one per entry of `results`.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let io = |e: &dyn std::fmt::Display| CliError::Io(format!("{}: {e}", path.display()));
        let file = File::create(path).map_err(|e| io(&e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(self.columns).map_err(|e| io(&e))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| io(&e))?;
        }
        w.flush().map_err(|e| io(&e))
    }
}

/// What a subcommand hands back to `main`.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub table: Table,
    /// False when a verification failed.
    pub passed: bool,
}
