//! Report rows, verdicts and their CSV form.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::config::{ScenarioConfig, ScenarioId};
use crate::LabError;

/// One line of a scenario table. Metric values are keyed by column name;
/// missing metrics are written as empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub label: String,
    /// Sweep value (N or ε) when the row belongs to the sweep.
    pub param: Option<f64>,
    pub seed: u64,
    pub stream_offset: u64,
    pub values: BTreeMap<String, f64>,
}

impl Row {
    pub fn new(label: impl Into<String>, param: Option<f64>, seed: u64, stream_offset: u64) -> Self {
        Self { label: label.into(), param, seed, stream_offset, values: BTreeMap::new() }
    }

    pub fn set(&mut self, key: &str, value: f64) -> &mut Self {
        self.values.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub scenario: ScenarioId,
    pub config_hash: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
    pub verdicts: Vec<Verdict>,
    /// Warnings and skipped checks.
    pub notes: Vec<String>,
}

/// Leading columns shared by every scenario table.
pub const KEY_COLUMNS: [&str; 6] = ["scenario", "config_hash", "seed", "stream_offset", "label", "param"];

/// Shortest text that parses back to the same `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:?}")
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn row(&self, label: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn sweep_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.param.is_some())
    }

    pub fn header(&self) -> Vec<String> {
        KEY_COLUMNS.iter().chain(&self.columns).map(|s| s.to_string()).collect()
    }

    pub fn record(&self, row: &Row) -> Vec<String> {
        let mut out = vec![
            self.scenario.to_string(),
            self.config_hash.clone(),
            row.seed.to_string(),
            row.stream_offset.to_string(),
            row.label.clone(),
            row.param.map(format_value).unwrap_or_default(),
        ];
        out.extend(self.columns.iter().map(|c| row.get(c).map(format_value).unwrap_or_default()));
        out
    }

    pub fn table_path(dir: &Path, id: ScenarioId) -> PathBuf {
        dir.join(format!("{id}.csv"))
    }

    /// Writes `<id>.csv`, `<id>_verdicts.csv` and the canonical config
    /// `config-<hash>.toml` used by replay.
    pub fn write(&self, dir: &Path, config: &ScenarioConfig) -> Result<Vec<PathBuf>, LabError> {
        std::fs::create_dir_all(dir)?;
        let table = Self::table_path(dir, self.scenario);
        let mut w = csv::Writer::from_path(&table)?;
        w.write_record(self.header())?;
        for row in &self.rows {
            w.write_record(self.record(row))?;
        }
        w.flush()?;

        let verdicts = dir.join(format!("{}_verdicts.csv", self.scenario));
        let mut w = csv::Writer::from_path(&verdicts)?;
        w.write_record(["scenario", "config_hash", "verdict", "passed", "detail"])?;
        for v in &self.verdicts {
            w.write_record([
                self.scenario.to_string(),
                self.config_hash.clone(),
                v.name.clone(),
                v.passed.to_string(),
                v.detail.clone(),
            ])?;
        }
        for n in &self.notes {
            w.write_record([self.scenario.to_string(), self.config_hash.clone(), "note".into(), String::new(), n.clone()])?;
        }
        w.flush()?;

        let cfg = dir.join(format!("config-{}.toml", self.config_hash));
        std::fs::write(&cfg, config.canonical())?;
        Ok(vec![table, verdicts, cfg])
    }

    /// Human-readable verdict summary.
    pub fn summary(&self) -> String {
        let mut s = format!("scenario {} (config {})\n", self.scenario, self.config_hash);
        for v in &self.verdicts {
            s += &format!("  [{}] {}: {}\n", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
        }
        for n in &self.notes {
            s += &format!("  note: {n}\n");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip_through_text() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 1e21, 0.0] {
            assert_eq!(format_value(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(format_value(f64::NAN), "NaN");
    }
}
