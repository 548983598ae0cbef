//! Latency, energy and throughput accounting.
//!
//! Cycle counts from the simulators are combined with per-layer dynamic
//! power coefficients: a layer's energy is its power times its active
//! time, the per-image energy is the sum over layers, and the makespan is
//! the sum of layer times (sequential, the default: each layer finishes
//! the image before the next starts) or the maximum (layer-pipelined).
//!
//! Two coefficient tables measured on the synthesized VGG9 hardware ship
//! built in, one per weight precision. Their printed totals are kept as
//! published; the per-layer columns are rounded instance figures and do
//! not sum exactly to them.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

/// How layer times combine into a per-image makespan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AccountingMode {
    Sequential,
    LayerPipelined,
}

/// Per-layer dynamic power coefficients plus the design's static power.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PowerTable {
    label: String,
    per_layer_w: Vec<f64>,
    total_dynamic_w: f64,
    static_w: f64,
}

impl PowerTable {
    /// `total_dynamic_w` defaults to the sum of the per-layer column when
    /// not supplied separately.
    pub fn new(
        label: &str,
        per_layer_w: Vec<f64>,
        total_dynamic_w: Option<f64>,
        static_w: f64,
    ) -> Result<Self> {
        if per_layer_w.iter().any(|&p| !(p.is_finite() && p >= 0.0))
            || !(static_w.is_finite() && static_w >= 0.0)
        {
            return Err(Error::InvalidParam {
                context: "power coefficients must be non-negative and finite",
            });
        }
        let sum: f64 = per_layer_w.iter().sum();
        let total = total_dynamic_w.unwrap_or(sum);
        if !(total.is_finite() && total >= 0.0) {
            return Err(Error::InvalidParam {
                context: "total dynamic power must be non-negative and finite",
            });
        }
        Ok(Self {
            label: label.to_string(),
            per_layer_w,
            total_dynamic_w: total,
            static_w,
        })
    }

    /// Instance-level dynamic power of the 4-bit VGG9 hardware.
    pub fn int4_vgg9() -> Self {
        Self::new(
            "int4",
            alloc::vec![0.048, 0.205, 0.054, 0.17, 0.1, 0.293, 0.284, 0.125],
            Some(1.231),
            3.13,
        )
        .expect("built-in table is valid")
    }

    /// Instance-level dynamic power of the full-precision VGG9 hardware.
    pub fn fp32_vgg9() -> Self {
        Self::new(
            "fp32",
            alloc::vec![0.051, 0.251, 0.152, 0.561, 0.405, 0.96, 0.634, 0.508],
            Some(3.471),
            3.22,
        )
        .expect("built-in table is valid")
    }

    /// Flat table: the same coefficient for every layer.
    pub fn uniform(watts: f64, layers: usize) -> Result<Self> {
        Self::new("uniform", alloc::vec![watts; layers], None, 0.0)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn per_layer_w(&self) -> &[f64] {
        &self.per_layer_w
    }

    pub fn total_dynamic_w(&self) -> f64 {
        self.total_dynamic_w
    }

    pub fn static_w(&self) -> f64 {
        self.static_w
    }
}

/// One layer's activity, as fed into the energy model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LayerCycles {
    pub cycles: u64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub spikes: u64,
}

/// One layer's share of the report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LayerEnergy {
    pub cycles: u64,
    pub seconds: f64,
    pub spikes: u64,
    pub power_w: f64,
    pub dynamic_energy_j: f64,
    /// Percent of the makespan spent in this layer.
    pub latency_share_pct: f64,
    /// Percent of the dynamic energy spent in this layer.
    pub energy_share_pct: f64,
}

/// Latency/energy/throughput summary of one simulated run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PerfReport {
    pub layers: Vec<LayerEnergy>,
    pub mode: AccountingMode,
    pub clock_hz: f64,
    pub table_label: String,
    /// Total dynamic power of the design, echoed from the table.
    pub table_total_power_w: f64,
    pub static_power_w: f64,
    /// Per-image latency under the selected accounting mode.
    pub makespan_s: f64,
    pub dynamic_energy_j: f64,
    pub static_energy_j: f64,
    pub total_energy_j: f64,
    pub total_spikes: u64,
    /// `1 / makespan`; absent when nothing was simulated.
    pub throughput_fps: Option<f64>,
}

impl PerfReport {
    /// Wrap externally measured totals (e.g. published figures) so they
    /// can flow through the comparison arithmetic.
    pub fn from_measurements(latency_s: f64, dynamic_energy_j: f64, spikes: u64) -> Self {
        Self {
            layers: Vec::new(),
            mode: AccountingMode::Sequential,
            clock_hz: 0.0,
            table_label: "measured".to_string(),
            table_total_power_w: 0.0,
            static_power_w: 0.0,
            makespan_s: latency_s,
            dynamic_energy_j,
            static_energy_j: 0.0,
            total_energy_j: dynamic_energy_j,
            total_spikes: spikes,
            throughput_fps: (latency_s > 0.0).then(|| 1.0 / latency_s),
        }
    }
}

/// Convert per-layer cycle counts into the energy/latency report.
pub fn energy_report(
    layers: &[LayerCycles],
    table: &PowerTable,
    clock_hz: f64,
    mode: AccountingMode,
    include_static: bool,
) -> Result<PerfReport> {
    if !(clock_hz.is_finite() && clock_hz > 0.0) {
        return Err(Error::InvalidParam {
            context: "clock frequency must be positive",
        });
    }
    if layers.len() != table.per_layer_w().len() {
        return Err(Error::MissingCoefficient {
            layer: layers.len().min(table.per_layer_w().len()),
        });
    }
    let seconds: Vec<f64> = layers.iter().map(|l| l.cycles as f64 / clock_hz).collect();
    let makespan = match mode {
        AccountingMode::Sequential => seconds.iter().sum(),
        AccountingMode::LayerPipelined => seconds.iter().copied().fold(0.0, f64::max),
    };
    let energies: Vec<f64> = seconds
        .iter()
        .zip(table.per_layer_w())
        .map(|(s, p)| s * p)
        .collect();
    let dynamic: f64 = energies.iter().sum();
    let static_energy = if include_static {
        table.static_w() * makespan
    } else {
        0.0
    };
    let share = |part: f64, whole: f64| {
        if whole > 0.0 {
            part / whole * 100.0
        } else {
            0.0
        }
    };
    let layer_reports = layers
        .iter()
        .zip(&seconds)
        .zip(&energies)
        .zip(table.per_layer_w())
        .map(|(((l, &s), &e), &p)| LayerEnergy {
            cycles: l.cycles,
            seconds: s,
            spikes: l.spikes,
            power_w: p,
            dynamic_energy_j: e,
            latency_share_pct: share(s, makespan),
            energy_share_pct: share(e, dynamic),
        })
        .collect();
    Ok(PerfReport {
        layers: layer_reports,
        mode,
        clock_hz,
        table_label: table.label().to_string(),
        table_total_power_w: table.total_dynamic_w(),
        static_power_w: table.static_w(),
        makespan_s: makespan,
        dynamic_energy_j: dynamic,
        static_energy_j: static_energy,
        total_energy_j: dynamic + static_energy,
        total_spikes: layers.iter().map(|l| l.spikes).sum(),
        throughput_fps: (makespan > 0.0).then(|| 1.0 / makespan),
    })
}

/// Per-layer ratio row of a run comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LayerRatio {
    pub cycles: f64,
    pub dynamic_energy: f64,
    pub spikes: f64,
}

/// Ratios of run `b` over run `a`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunComparison {
    pub latency_ratio: f64,
    pub energy_ratio: f64,
    pub throughput_ratio: f64,
    pub spike_ratio: f64,
    pub per_layer: Vec<LayerRatio>,
}

#[inline]
fn ratio(a: f64, b: f64) -> f64 {
    if a == b {
        1.0
    } else {
        b / a
    }
}

/// Elementwise and total `b / a` ratios of two reports with the same
/// layer structure.
pub fn compare_runs(a: &PerfReport, b: &PerfReport) -> Result<RunComparison> {
    if a.layers.len() != b.layers.len() {
        return Err(Error::ShapeMismatch {
            context: "reports have different layer counts",
        });
    }
    let per_layer = a
        .layers
        .iter()
        .zip(&b.layers)
        .map(|(la, lb)| LayerRatio {
            cycles: ratio(la.cycles as f64, lb.cycles as f64),
            dynamic_energy: ratio(la.dynamic_energy_j, lb.dynamic_energy_j),
            spikes: ratio(la.spikes as f64, lb.spikes as f64),
        })
        .collect();
    Ok(RunComparison {
        latency_ratio: ratio(a.makespan_s, b.makespan_s),
        energy_ratio: ratio(a.dynamic_energy_j, b.dynamic_energy_j),
        throughput_ratio: ratio(
            a.throughput_fps.unwrap_or(0.0),
            b.throughput_fps.unwrap_or(0.0),
        ),
        spike_ratio: ratio(a.total_spikes as f64, b.total_spikes as f64),
        per_layer,
    })
}

/// Percent spike reduction of a quantized run against its full-precision
/// twin: `100 * (1 - spikes_int / spikes_fp)`.
pub fn quant_sparsity_report(fp: &PerfReport, int: &PerfReport) -> Result<f64> {
    if fp.total_spikes == 0 {
        return Err(Error::ZeroBaseline {
            context: "full-precision run produced no spikes",
        });
    }
    Ok(100.0 * (1.0 - int.total_spikes as f64 / fp.total_spikes as f64))
}
