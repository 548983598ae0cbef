//! Layer-wise workload modeling and neural-core allocation.
//!
//! The workload of a spiking CONV layer is `F x C_out x sum(S_i)` (filter
//! coefficients times output channels times input spikes) and of an FC
//! layer `N x S` (output neurons times input spikes). The partitioner
//! spreads a neural-core budget so the slowest layer's `W / n` latency
//! proxy is minimal: start at one core per layer, then repeatedly grant a
//! core to the currently slowest layer. The dense input core is a
//! separate unit and never draws from the NC budget.

use alloc::vec;
use alloc::vec::Vec;

use crate::neuron::LifParams;
use crate::oracle::{reference_forward, Layer, LayerKind, NetInput, NetworkSpec};
use crate::tensor::Tensor;
use crate::{Error, Result};

/// What kind of hardware unit a trace row maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum TraceKind {
    /// Direct-coded input convolution handled by the dense core.
    Dense,
    /// Event-driven convolution.
    Conv,
    /// Event-driven fully connected layer.
    Fc,
}

/// One layer's workload figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEntry {
    pub layer_index: usize,
    pub kind: TraceKind,
    /// Filter coefficient count (9 for 3x3 convs; unused for fc).
    pub filter_coeffs: u64,
    /// Output channels (conv) or output neurons (fc).
    pub outputs: u64,
    /// Input spikes summed over feature maps and timesteps.
    pub spike_sum: u64,
}

/// Per-layer workload figures for one network and input.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WorkloadTrace {
    pub entries: Vec<TraceEntry>,
}

/// Evaluate the workload model for one layer.
pub fn layer_workload(entry: &TraceEntry) -> u64 {
    match entry.kind {
        TraceKind::Dense | TraceKind::Conv => entry.filter_coeffs * entry.outputs * entry.spike_sum,
        TraceKind::Fc => entry.outputs * entry.spike_sum,
    }
}

/// Named resource configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum AllocLabel {
    Lw,
    Perf2,
    Perf4,
    Custom,
}

/// Dense-core rows plus neural cores per sparse layer.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Allocation {
    /// Row count for the dense input core, when the trace had one.
    pub dense_rows: Option<u32>,
    /// Neural cores per sparse layer, in trace order.
    pub nc_per_layer: Vec<u32>,
    pub label: AllocLabel,
}

impl Allocation {
    /// Flat per-weighted-layer form: dense rows first when present.
    pub fn flat(&self) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.nc_per_layer.len() + 1);
        if let Some(rows) = self.dense_rows {
            v.push(rows);
        }
        v.extend_from_slice(&self.nc_per_layer);
        v
    }
}

/// `w_a / n_a > w_b / n_b` without floating point.
#[inline]
fn ratio_gt(w_a: u64, n_a: u32, w_b: u64, n_b: u32) -> bool {
    u128::from(w_a) * u128::from(n_b) > u128::from(w_b) * u128::from(n_a)
}

/// Balance a neural-core budget across the trace's sparse layers.
///
/// Greedy: start with one core per layer, then repeatedly grant one core
/// to the layer with the largest `W / n` (ties to the lowest layer index)
/// until the budget is spent. The result is a global minimizer of
/// `max(W_l / n_l)`.
pub fn partition(budget: u32, trace: &WorkloadTrace) -> Result<Allocation> {
    let has_dense = trace
        .entries
        .iter()
        .any(|e| matches!(e.kind, TraceKind::Dense));
    let workloads: Vec<u64> = trace
        .entries
        .iter()
        .filter(|e| !matches!(e.kind, TraceKind::Dense))
        .map(layer_workload)
        .collect();
    if workloads.is_empty() {
        return Err(Error::InvalidParam {
            context: "trace has no sparse layers to allocate",
        });
    }
    if (budget as usize) < workloads.len() {
        return Err(Error::BudgetTooSmall {
            budget,
            layers: workloads.len(),
        });
    }
    let mut cores = vec![1u32; workloads.len()];
    for _ in 0..budget as usize - workloads.len() {
        let mut slowest = 0usize;
        for i in 1..workloads.len() {
            if ratio_gt(workloads[i], cores[i], workloads[slowest], cores[slowest]) {
                slowest = i;
            }
        }
        cores[slowest] += 1;
    }
    Ok(Allocation {
        dense_rows: has_dense.then_some(1),
        nc_per_layer: cores,
        label: AllocLabel::Lw,
    })
}

/// Scale every entry (dense rows included) by `k` in {1, 2, 4}.
pub fn scale_allocation(a: &Allocation, k: u32) -> Result<Allocation> {
    match k {
        1 => Ok(a.clone()),
        2 | 4 => Ok(Allocation {
            dense_rows: a.dense_rows.map(|r| r * k),
            nc_per_layer: a.nc_per_layer.iter().map(|n| n * k).collect(),
            label: if k == 2 {
                AllocLabel::Perf2
            } else {
                AllocLabel::Perf4
            },
        }),
        _ => Err(Error::InvalidParam {
            context: "allocation scale factor must be 1, 2 or 4",
        }),
    }
}

/// Run the network once on the reference and record per-layer workloads.
///
/// Spike sums are the spikes each weighted layer consumed; the
/// direct-coded input layer consumes pixels, not spikes, and is recorded
/// with kind `Dense` and spike sum 0.
pub fn measure_trace(
    net: &NetworkSpec,
    image: &Tensor,
    params: &LifParams,
) -> Result<WorkloadTrace> {
    let run = reference_forward(net, &NetInput::Direct(image.clone()), params)?;
    let weighted: Vec<&Layer> = net
        .layers()
        .iter()
        .filter(|l| !matches!(l, Layer::MaxPool { .. }))
        .collect();
    debug_assert_eq!(weighted.len(), run.layers.len());
    let entries = weighted
        .iter()
        .zip(&run.layers)
        .enumerate()
        .map(|(idx, (layer, trace))| match layer {
            Layer::Conv(spec) => TraceEntry {
                layer_index: idx,
                kind: if matches!(trace.kind, LayerKind::InputConv) {
                    TraceKind::Dense
                } else {
                    TraceKind::Conv
                },
                filter_coeffs: (spec.kernel() * spec.kernel()) as u64,
                outputs: spec.out_channels() as u64,
                spike_sum: trace.input_spikes,
            },
            Layer::Fc(spec) => TraceEntry {
                layer_index: idx,
                kind: TraceKind::Fc,
                filter_coeffs: 0,
                outputs: spec.out_neurons() as u64,
                spike_sum: trace.input_spikes,
            },
            Layer::MaxPool { .. } => unreachable!("pools filtered out"),
        })
        .collect();
    Ok(WorkloadTrace { entries })
}

/// Arithmetic mean of several traces of the same structure (spike sums
/// rounded to the nearest count).
pub fn mean_trace(traces: &[WorkloadTrace]) -> Result<WorkloadTrace> {
    let first = traces.first().ok_or(Error::InvalidParam {
        context: "mean of zero traces",
    })?;
    let n = traces.len() as u64;
    let mut entries = first.entries.clone();
    for trace in traces {
        if trace.entries.len() != entries.len() {
            return Err(Error::ShapeMismatch {
                context: "traces have different layer counts",
            });
        }
    }
    for (i, entry) in entries.iter_mut().enumerate() {
        let sum: u64 = traces.iter().map(|t| t.entries[i].spike_sum).sum();
        entry.spike_sum = (sum + n / 2) / n;
    }
    Ok(WorkloadTrace { entries })
}
