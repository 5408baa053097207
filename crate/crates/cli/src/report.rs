//! Machine-readable outputs and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use vaxstock_core::demand::SigmoidParams;
use vaxstock_core::simulate::SweepRow;

use crate::args::Command;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonOutput {
    pub schema_version: u32,
    pub kind: String,
    pub n: usize,
    pub p: f64,
    pub epsilon: f64,
    /// P(n, ε) evaluated back at the returned ε.
    pub probability: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOutput {
    pub schema_version: u32,
    pub kind: String,
    pub location: String,
    pub value_column: String,
    pub first_date: String,
    pub last_date: String,
    /// Last day T; day 1 is `first_date`.
    pub horizon: u32,
    pub points: usize,
    pub corrected_points: usize,
    pub params: SigmoidParams,
    pub sse: f64,
    pub rmse: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub delivery: usize,
    pub quantity: f64,
    /// Day at which the expected share `k/(n+1)` of demand is reached.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nominal_day: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanOutput {
    pub schema_version: u32,
    pub kind: String,
    pub n: usize,
    pub p: f64,
    pub total_demand: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub population: Option<f64>,
    pub epsilon: f64,
    pub initial_stock: f64,
    pub lot: f64,
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub horizon: Option<f64>,
    pub schedule: Vec<ScheduleEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub schema_version: u32,
    pub kind: String,
    pub n: usize,
    pub epsilon: f64,
    pub initial_stock: f64,
    pub lot: f64,
    pub total_demand: f64,
    pub horizon: f64,
    pub trials: u64,
    pub seed: u64,
    pub day_rounding: bool,
    pub non_shortage_count: u64,
    pub probability: f64,
    pub std_error: f64,
    /// Distribution-free guarantee P(n, M/D) for comparison.
    pub model_probability: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepOutput {
    pub schema_version: u32,
    pub kind: String,
    pub n: usize,
    pub initial_stock: f64,
    pub total_demand: f64,
    pub horizon: f64,
    pub trials: u64,
    pub seed: u64,
    pub day_rounding: bool,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorOutput {
    pub schema_version: u32,
    pub kind: String,
    pub code: String,
    pub exit_code: u8,
    pub message: String,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub kind: String,
    pub version: String,
    pub timestamp: String,
    pub outputs: Vec<PathBuf>,
    pub run: Command,
}

impl RunManifest {
    pub fn new(run: Command, outputs: Vec<PathBuf>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: "manifest".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            outputs,
            run,
        }
    }

    /// `<output>.manifest.json` next to the first output.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::internal)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("{} is not valid JSON: {e}", path.display())))?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        other => {
            return Err(CliError::data(format!(
                "{}: unsupported schema_version {other:?}",
                path.display()
            )))
        }
    }
    if value.get("kind").and_then(|v| v.as_str()) != Some(kind) {
        return Err(CliError::data(format!(
            "{}: expected a `{kind}` document",
            path.display()
        )));
    }
    serde_json::from_value(value).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("lot,probability,std_error\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.lot, r.probability, r.std_error));
    }
    out
}
