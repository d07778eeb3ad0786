use serde::Serialize;
use serde_json::Value;

use super::config::RunConfig;
use crate::principles::CaseResidual;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One checked quantity in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportCase {
    pub case: String,
    pub value: f64,
    /// Value the case is compared against, when there is one.
    pub expected: Option<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ReportCase {
    /// `|value - expected| <= tolerance`
    pub fn compare(case: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        let residual = (value - expected).abs();
        ReportCase {
            case: case.into(),
            value,
            expected: Some(expected),
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }

    pub fn from_residual(c: &CaseResidual) -> Self {
        ReportCase {
            case: c.case.clone(),
            value: c.residual,
            expected: None,
            residual: c.residual,
            tolerance: c.tolerance,
            pass: c.pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

/// JSON report written by every command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: RunConfig,
    pub cases: Vec<ReportCase>,
    pub verdict: Verdict,
    pub pass: bool,
    /// Files written next to the report, relative to the output directory.
    pub artifacts: Vec<String>,
    /// Command-specific structured results.
    pub details: Value,
}
