//! Scenario runner for the selection experiments: configuration, per-row
//! computation, CSV reports with pure verdict logic, replay and plots.

pub mod config;
pub mod plot;
pub mod replay;
pub mod report;
pub mod scenarios;

pub use config::{ScenarioConfig, ScenarioId};
pub use report::{Row, ScenarioReport, Verdict};

use std::path::{Path, PathBuf};

/// Writes the report tables, the canonical config and, when asked, the
/// SVG chart of the key metric.
pub fn write_outputs(
    report: &ScenarioReport,
    cfg: &ScenarioConfig,
    dir: &Path,
    plots: bool,
) -> Result<Vec<PathBuf>, LabError> {
    let mut files = report.write(dir, cfg)?;
    if plots {
        if let Some(svg) = plot::report_chart(report) {
            let path = dir.join(format!("{}.svg", report.scenario));
            std::fs::write(&path, svg)?;
            files.push(path);
        }
    }
    Ok(files)
}

#[derive(Debug)]
pub enum LabError {
    Config(String),
    Core(mfselect_core::Error),
    Io(String),
}

impl std::fmt::Display for LabError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabError::Config(m) => write!(f, "configuration error: {m}"),
            LabError::Core(e) => write!(f, "numerical error: {e}"),
            LabError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<mfselect_core::Error> for LabError {
    fn from(e: mfselect_core::Error) -> Self {
        LabError::Core(e)
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
