//! Power-table selection, cycle-input JSON and report emission.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use spikesim_core::report::{LayerCycles, PerfReport, PowerTable};

use crate::{CliError, Result};

/// Resolve `int4`, `fp32` or a JSON file path into a power table.
pub fn resolve_power_table(selector: &str, base: &Path) -> Result<PowerTable> {
    match selector {
        "int4" => Ok(PowerTable::int4_vgg9()),
        "fp32" => Ok(PowerTable::fp32_vgg9()),
        path => load_power_table(&base.join(path)),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPowerTable {
    label: Option<String>,
    per_layer_w: Vec<f64>,
    #[serde(default)]
    total_dynamic_w: Option<f64>,
    #[serde(default)]
    static_w: f64,
}

pub fn load_power_table(path: &Path) -> Result<PowerTable> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let raw: RawPowerTable = serde_json::from_str(&text)
        .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    Ok(PowerTable::new(
        raw.label.as_deref().unwrap_or("custom"),
        raw.per_layer_w,
        raw.total_dynamic_w,
        raw.static_w,
    )?)
}

/// Input for the standalone `report` subcommand.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclesFile {
    #[serde(default)]
    pub clock_hz: Option<f64>,
    pub layers: Vec<LayerCycles>,
}

pub fn load_cycles(path: &Path) -> Result<CyclesFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

/// Per-layer CSV summary of a report.
pub fn report_csv(report: &PerfReport) -> String {
    let mut out =
        String::from("layer,cycles,seconds,spikes,power_w,dynamic_energy_j,latency_share_pct\n");
    for (i, l) in report.layers.iter().enumerate() {
        out.push_str(&format!(
            "{i},{},{:.9e},{},{},{:.9e},{:.3}\n",
            l.cycles, l.seconds, l.spikes, l.power_w, l.dynamic_energy_j, l.latency_share_pct
        ));
    }
    out
}
