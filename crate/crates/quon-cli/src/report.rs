//! Versioned JSON verification report.

use quon_core::suite::CheckRecord;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct JsonReport {
    pub schema: u32,
    pub tool_version: String,
    pub dims: Vec<usize>,
    pub seed: u64,
    pub tol: f64,
    pub checks: Vec<JsonCheck>,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct JsonCheck {
    pub name: String,
    pub status: String,
    pub max_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scalar: Option<[f64; 2]>,
    pub runtime_ms: u64,
}

pub fn build_report(
    dims: &[usize],
    seed: u64,
    tol: f64,
    records: &[CheckRecord],
) -> JsonReport {
    let checks: Vec<JsonCheck> = records
        .iter()
        .map(|r| JsonCheck {
            name: r.name.clone(),
            status: r.status.as_str().to_string(),
            max_error: r.max_error,
            scalar: r.scalar.map(|s| [s.re, s.im]),
            runtime_ms: r.runtime_ms as u64,
        })
        .collect();
    JsonReport {
        schema: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        dims: dims.to_vec(),
        seed,
        tol,
        checks,
        pass: records.iter().all(|r| r.passed()),
    }
}

pub fn to_json(report: &JsonReport) -> String {
    serde_json::to_string_pretty(report).expect("serializable") + "\n"
}
