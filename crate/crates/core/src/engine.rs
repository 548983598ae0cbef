//! End-to-end network simulation on the hybrid architecture.
//!
//! Direct-coded runs put the first convolution on the dense core and
//! everything else on sparse cores; rate-coded runs see spikes at the
//! input and use sparse cores throughout (the dense core stays off).
//! Layers communicate through completed, immutable spike trains, so the
//! per-layer results are bit-identical to the brute-force oracle no
//! matter how the resource knobs are set.

use alloc::vec::Vec;

use crate::dense::{simulate_dense, DenseCoreConfig, DEFAULT_CLOCK_HZ, DEFAULT_PIPELINE_FILL};
use crate::memory::{gated_access, Access, MemRegionStats, SpikeTrain};
use crate::neuron::LifParams;
use crate::oracle::{classify, rate_encode, Layer, LayerKind, NetworkSpec};
use crate::report::LayerCycles;
use crate::sparse::{maxpool_train, simulate_sparse_conv, simulate_sparse_fc, SparseCoreConfig};
use crate::tensor::Tensor;
use crate::{Error, Result};

/// Input encoding of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Coding {
    Direct,
    Rate,
}

/// Resource and run knobs for one simulation.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// One entry per weighted layer: dense-core rows for the input layer
    /// of a direct-coded run, neural cores everywhere else.
    pub allocation: Vec<u32>,
    pub chunk_bits: usize,
    pub clock_hz: f64,
    pub coding: Coding,
    /// Required for rate coding.
    pub seed: Option<u64>,
    pub compression_overlap: bool,
    pub dense_pipeline_fill: u64,
}

impl RunOptions {
    pub fn direct(allocation: Vec<u32>) -> Self {
        Self {
            allocation,
            chunk_bits: 64,
            clock_hz: DEFAULT_CLOCK_HZ,
            coding: Coding::Direct,
            seed: None,
            compression_overlap: true,
            dense_pipeline_fill: DEFAULT_PIPELINE_FILL,
        }
    }

    pub fn rate(allocation: Vec<u32>, seed: u64) -> Self {
        Self {
            coding: Coding::Rate,
            seed: Some(seed),
            ..Self::direct(allocation)
        }
    }
}

/// One weighted layer's simulated outcome.
#[derive(Debug, Clone)]
pub struct LayerRun {
    pub kind: LayerKind,
    pub cycles: u64,
    pub seconds: f64,
    pub input_spikes: u64,
    pub output_spikes: u64,
    /// Slowest neural core's accumulation cycles (0 for the dense core).
    pub accumulation_cycles: u64,
    pub compression_cycles: u64,
    /// Spike RAM activity: input-plane reads plus output-plane writes.
    pub mem: MemRegionStats,
    pub train: SpikeTrain,
}

/// Full simulation result.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub layers: Vec<LayerRun>,
    pub total_cycles: u64,
    pub latency_s: f64,
    pub prediction: usize,
    pub class_spike_sums: Vec<u64>,
    pub timesteps: usize,
    pub coding: Coding,
}

impl SimRun {
    /// Network-wide spike count (all weighted layer outputs).
    pub fn total_spikes(&self) -> u64 {
        self.layers.iter().map(|l| l.output_spikes).sum()
    }

    /// Per-layer activity in the shape the energy model consumes.
    pub fn layer_cycles(&self) -> Vec<LayerCycles> {
        self.layers
            .iter()
            .map(|l| LayerCycles {
                cycles: l.cycles,
                spikes: l.output_spikes,
            })
            .collect()
    }
}

fn even_capacity(locations: usize) -> usize {
    (locations + locations % 2).max(2)
}

/// Count one read per consumed input plane and one write per produced
/// output plane against the layer's clock-gated spike RAM.
fn account_memory(input: Option<&SpikeTrain>, output: &SpikeTrain) -> Result<MemRegionStats> {
    let mut stats = MemRegionStats::default();
    if let Some(train) = input {
        let cap = even_capacity(train.locations());
        for addr in 0..train.locations() {
            gated_access(addr, cap, Access::Read, &mut stats)?;
        }
    }
    let cap = even_capacity(output.locations());
    for addr in 0..output.locations() {
        gated_access(addr, cap, Access::Write, &mut stats)?;
    }
    Ok(stats)
}

/// Simulate a whole network on the hybrid architecture.
pub fn simulate_network(
    net: &NetworkSpec,
    image: &Tensor,
    opts: &RunOptions,
    params: &LifParams,
) -> Result<SimRun> {
    if opts.allocation.len() != net.weighted_count() {
        return Err(Error::ShapeMismatch {
            context: "allocation must cover every weighted layer",
        });
    }
    if opts.allocation.contains(&0) {
        return Err(Error::InvalidParam {
            context: "allocation entries must be at least 1",
        });
    }
    if !(opts.clock_hz.is_finite() && opts.clock_hz > 0.0) {
        return Err(Error::InvalidParam {
            context: "clock frequency must be positive",
        });
    }

    let t_len = net.timesteps();
    let mut current: Option<SpikeTrain> = match opts.coding {
        Coding::Direct => None,
        Coding::Rate => {
            let seed = opts.seed.ok_or(Error::InvalidParam {
                context: "rate coding requires a seed",
            })?;
            Some(rate_encode(image, t_len, seed)?)
        }
    };

    let mut layers: Vec<LayerRun> = Vec::with_capacity(net.weighted_count());
    let mut weighted_idx = 0usize;
    let mut fc_counts: Option<Vec<u64>> = None;

    for layer in net.layers() {
        match layer {
            Layer::Conv(spec) => {
                let units = opts.allocation[weighted_idx] as usize;
                let run = match &current {
                    None => {
                        // Direct-coded input layer on the dense core.
                        let cfg = DenseCoreConfig::new(units)?
                            .with_pipeline_fill(opts.dense_pipeline_fill);
                        let dense = simulate_dense(spec, image, t_len, &cfg, params)?;
                        let mem = account_memory(None, &dense.train)?;
                        LayerRun {
                            kind: LayerKind::InputConv,
                            cycles: dense.cycles,
                            seconds: dense.cycles as f64 / opts.clock_hz,
                            input_spikes: 0,
                            output_spikes: dense.train.total_spikes(),
                            accumulation_cycles: 0,
                            compression_cycles: 0,
                            mem,
                            train: dense.train,
                        }
                    }
                    Some(prev) => {
                        let cfg = SparseCoreConfig::new(units, opts.chunk_bits)?
                            .with_overlap(opts.compression_overlap);
                        let sparse = simulate_sparse_conv(spec, &cfg, prev, params)?;
                        let mem = account_memory(Some(prev), &sparse.train)?;
                        LayerRun {
                            kind: LayerKind::Conv,
                            cycles: sparse.cycles,
                            seconds: sparse.cycles as f64 / opts.clock_hz,
                            input_spikes: prev.total_spikes(),
                            output_spikes: sparse.train.total_spikes(),
                            accumulation_cycles: sparse.stats.max_accumulation_cycles(),
                            compression_cycles: sparse.stats.compression_cycles,
                            mem,
                            train: sparse.train,
                        }
                    }
                };
                current = Some(run.train.clone());
                layers.push(run);
                weighted_idx += 1;
            }
            Layer::MaxPool { size } => {
                let prev = current.as_ref().ok_or(Error::ShapeMismatch {
                    context: "pool before any spiking layer",
                })?;
                current = Some(maxpool_train(prev, *size)?);
            }
            Layer::Fc(spec) => {
                let prev = current.as_ref().ok_or(Error::ShapeMismatch {
                    context: "fc before any spiking layer",
                })?;
                let cfg =
                    SparseCoreConfig::new(opts.allocation[weighted_idx] as usize, opts.chunk_bits)?
                        .with_overlap(opts.compression_overlap);
                let fc = simulate_sparse_fc(spec, &cfg, prev, params)?;
                let mem = account_memory(Some(prev), &fc.train)?;
                layers.push(LayerRun {
                    kind: LayerKind::Fc,
                    cycles: fc.cycles,
                    seconds: fc.cycles as f64 / opts.clock_hz,
                    input_spikes: prev.total_spikes(),
                    output_spikes: fc.train.total_spikes(),
                    accumulation_cycles: fc.stats.max_accumulation_cycles(),
                    compression_cycles: fc.stats.compression_cycles,
                    mem,
                    train: fc.train.clone(),
                });
                fc_counts = Some(fc.spike_counts);
                current = Some(fc.train);
                weighted_idx += 1;
            }
        }
    }

    let counts = fc_counts.ok_or(Error::ShapeMismatch {
        context: "network ended without an fc layer",
    })?;
    let (prediction, class_spike_sums) = classify(&counts, net.population(), net.classes())?;
    let total_cycles: u64 = layers.iter().map(|l| l.cycles).sum();
    Ok(SimRun {
        latency_s: total_cycles as f64 / opts.clock_hz,
        total_cycles,
        layers,
        prediction,
        class_spike_sums,
        timesteps: t_len,
        coding: opts.coding,
    })
}
