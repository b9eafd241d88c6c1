//! The three files of a run directory. Nothing written here depends on
//! the worker count, the clock or the output path, so replays compare
//! byte for byte.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::commands::{Outcome, RunError, Table};
use crate::config::ExperimentConfig;
use crate::Command;

pub const SCHEMA_VERSION: u32 = 1;

pub const CONFIG_FILE: &str = "config.json";
pub const RESULTS_FILE: &str = "results.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    /// Process exit code for this status.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

/// Machine-readable description of an error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
}

impl From<&RunError> for ErrorRecord {
    fn from(e: &RunError) -> Self {
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report<'a> {
    pub schema_version: u32,
    pub command: Command,
    pub status: Status,
    pub violations: &'a [String],
    pub error: Option<ErrorRecord>,
    pub seed: u64,
    pub config: &'a ExperimentConfig,
    pub result: &'a Value,
}

impl<'a> Report<'a> {
    pub fn from_outcome(config: &'a ExperimentConfig, outcome: &'a Outcome) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: outcome.command,
            status: if outcome.violations.is_empty() {
                Status::Pass
            } else {
                Status::Fail
            },
            violations: &outcome.violations,
            error: None,
            seed: config.seed,
            config,
            result: &outcome.result,
        }
    }

    pub fn from_error(command: Command, config: &'a ExperimentConfig, error: &RunError) -> Self {
        const NULL: &Value = &Value::Null;
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            status: Status::Error,
            violations: &[],
            error: Some(error.into()),
            seed: config.seed,
            config,
            result: NULL,
        }
    }
}

/// Copy of `config` as embedded in artifacts: the output directory is
/// dropped because it does not influence any number.
pub fn embedded_config(config: &ExperimentConfig) -> ExperimentConfig {
    ExperimentConfig {
        output_dir: None,
        ..config.clone()
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_csv(path: &Path, table: &Table) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `config.json`, `results.csv` and `report.json` into `dir`.
pub fn write_artifacts(dir: &Path, config: &ExperimentConfig, outcome: &Outcome) -> Result<Status, RunError> {
    fs::create_dir_all(dir)?;
    let config = embedded_config(config);
    let report = Report::from_outcome(&config, outcome);
    write_json(&dir.join(CONFIG_FILE), &config)?;
    write_csv(&dir.join(RESULTS_FILE), &outcome.table)?;
    write_json(&dir.join(REPORT_FILE), &report)?;
    Ok(report.status)
}

/// Records a failed run: `config.json` and a `report.json` holding the
/// error. Any stale `results.csv` is removed.
pub fn write_error_artifacts(
    dir: &Path,
    command: Command,
    config: &ExperimentConfig,
    error: &RunError,
) -> Result<(), RunError> {
    fs::create_dir_all(dir)?;
    let config = embedded_config(config);
    write_json(&dir.join(CONFIG_FILE), &config)?;
    let stale = dir.join(RESULTS_FILE);
    if stale.exists() {
        fs::remove_file(stale)?;
    }
    write_json(&dir.join(REPORT_FILE), &Report::from_error(command, &config, error))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_cells_are_quoted_when_needed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let table = Table {
            header: vec!["name".into(), "value".into()],
            rows: vec![
                vec!["a, b".into(), "say \"hi\"".into()],
                vec!["plain".into(), "1".into()],
            ],
        };
        write_csv(&path, &table).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "name,value\n\"a, b\",\"say \"\"hi\"\"\"\nplain,1\n");
    }
}
