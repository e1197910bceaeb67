//! Recomputes one report row from its recorded config and compares every
//! cell textually.

use std::path::{Path, PathBuf};

use crate::config::ScenarioConfig;
use crate::report::ScenarioReport;
use crate::scenarios::{columns, compute_row, plan};
use crate::LabError;

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub column: String,
    pub recorded: String,
    pub recomputed: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutcome {
    pub label: String,
    pub config_hash: String,
    pub mismatches: Vec<Mismatch>,
}

impl ReplayOutcome {
    pub fn identical(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Splits `<csv>:<row>` with a 1-based data row number.
pub fn parse_target(target: &str) -> Result<(PathBuf, usize), LabError> {
    let (path, row) = target
        .rsplit_once(':')
        .ok_or_else(|| LabError::Config(format!("expected <csv>:<row>, got {target:?}")))?;
    let row: usize = row
        .parse()
        .map_err(|_| LabError::Config(format!("bad row number {row:?}")))?;
    if row == 0 {
        return Err(LabError::Config("row numbers start at 1".into()));
    }
    Ok((PathBuf::from(path), row))
}

pub fn replay(csv_path: &Path, row_number: usize) -> Result<ReplayOutcome, LabError> {
    let mut reader = csv::Reader::from_path(csv_path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let record = reader
        .records()
        .nth(row_number - 1)
        .ok_or_else(|| LabError::Config(format!("{} has no data row {row_number}", csv_path.display())))??;
    let cell = |name: &str| -> Result<String, LabError> {
        let i = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LabError::Config(format!("column {name} missing")))?;
        Ok(record.get(i).unwrap_or_default().to_string())
    };

    let hash = cell("config_hash")?;
    let dir = csv_path.parent().unwrap_or_else(|| Path::new("."));
    let cfg = ScenarioConfig::load(&dir.join(format!("config-{hash}.toml")))?;
    if cfg.hash_hex() != hash {
        return Err(LabError::Config(format!("config hash {} does not match the row's {hash}", cfg.hash_hex())));
    }
    let label = cell("label")?;
    let row_plan = plan(&cfg)
        .into_iter()
        .find(|p| p.label == label)
        .ok_or_else(|| LabError::Config(format!("row {label:?} is not part of the scenario")))?;
    let row = compute_row(&cfg, &row_plan)?;

    let report = ScenarioReport {
        scenario: cfg.scenario.id,
        config_hash: hash.clone(),
        columns: columns(cfg.scenario.id),
        rows: Vec::new(),
        verdicts: Vec::new(),
        notes: Vec::new(),
    };
    let expected_header = report.header();
    if expected_header != header {
        return Err(LabError::Config("CSV columns differ from the scenario schema".into()));
    }
    let fresh = report.record(&row);
    let mismatches = header
        .iter()
        .zip(record.iter().zip(&fresh))
        .filter(|(_, (a, b))| a != b)
        .map(|(c, (a, b))| Mismatch { column: c.clone(), recorded: a.to_string(), recomputed: b.clone() })
        .collect();
    Ok(ReplayOutcome { label, config_hash: hash, mismatches })
}
