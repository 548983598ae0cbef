//! Event-driven sparse core: spike compression, scatter accumulation,
//! spiking phase, OR max-pooling and the FC path.
//!
//! The event control unit tiles each input plane into n-bit chunks and
//! strips the zero bits with a priority encoder, yielding a compact event
//! list (one extracted event per cycle; an empty chunk still costs its
//! scan cycle). For every event, address generation finds the <= 9 output
//! neurons it touches and each neural core applies the corresponding
//! filter taps to its strided subset of output channels, one neuron
//! update per cycle. Compression runs concurrently with the update
//! pipeline, so by default its cycles only count where they exceed the
//! cores' busy time.

use alloc::vec;
use alloc::vec::Vec;

use crate::bits::BitPlane;
use crate::dense::ConvLayerSpec;
use crate::memory::SpikeTrain;
use crate::neuron::{lif_plane_step, lif_step, LifParams, LifState};
use crate::quant::Coefficients;
use crate::{Error, Result};

/// Coordinates of one '1' bit within an input plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpikeEvent {
    pub row: usize,
    pub col: usize,
}

/// Sizing knobs of one sparse core instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparseCoreConfig {
    nc_count: usize,
    chunk_bits: usize,
    compression_overlap: bool,
}

impl SparseCoreConfig {
    pub fn new(nc_count: usize, chunk_bits: usize) -> Result<Self> {
        if nc_count == 0 {
            return Err(Error::InvalidParam {
                context: "sparse core needs at least one neural core",
            });
        }
        if !matches!(chunk_bits, 8 | 16 | 32 | 64) {
            return Err(Error::InvalidParam {
                context: "chunk width must be 8, 16, 32 or 64 bits",
            });
        }
        Ok(Self {
            nc_count,
            chunk_bits,
            compression_overlap: true,
        })
    }

    /// Turn the compression/accumulation overlap model off: compression
    /// cycles then serialize with the update pipeline.
    pub fn with_overlap(mut self, overlap: bool) -> Self {
        self.compression_overlap = overlap;
        self
    }

    pub fn nc_count(&self) -> usize {
        self.nc_count
    }

    pub fn chunk_bits(&self) -> usize {
        self.chunk_bits
    }

    pub fn overlap(&self) -> bool {
        self.compression_overlap
    }
}

/// Strip the zero bits from a plane.
///
/// Returns the set-bit coordinates ordered by (chunk, bit) — which is
/// row-major — and the scan cost: one cycle per extracted event, one
/// cycle for a chunk with nothing in it.
pub fn compress(plane: &BitPlane, chunk_bits: usize) -> Result<(Vec<SpikeEvent>, u64)> {
    let w = plane.width();
    let mut events = Vec::new();
    let mut cycles = 0u64;
    for (k, chunk) in plane.chunks(chunk_bits)?.enumerate() {
        cycles += u64::from(chunk.count_ones().max(1));
        let mut rest = chunk;
        while rest != 0 {
            let bit = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let idx = k * chunk_bits + bit;
            debug_assert!(idx < plane.bit_len(), "padding bit set");
            events.push(SpikeEvent {
                row: idx / w,
                col: idx % w,
            });
        }
    }
    Ok((events, cycles))
}

/// One neuron update caused by a spike event: the output position and
/// the kernel tap whose weight must be accumulated there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeuronUpdate {
    pub row: usize,
    pub col: usize,
    pub ky: usize,
    pub kx: usize,
}

#[inline]
fn for_each_update(
    row: usize,
    col: usize,
    h: usize,
    w: usize,
    mut f: impl FnMut(usize, usize, usize, usize),
) {
    for dy in -1isize..=1 {
        let r = row as isize + dy;
        if r < 0 || r as usize >= h {
            continue;
        }
        for dx in -1isize..=1 {
            let c = col as isize + dx;
            if c < 0 || c as usize >= w {
                continue;
            }
            f(r as usize, c as usize, (1 - dy) as usize, (1 - dx) as usize);
        }
    }
}

/// Output neurons affected by one spike event under same-padding,
/// stride-1, 3x3 geometry, in row-major order. Boundary events touch
/// fewer than 9 neurons.
pub fn gen_update_addresses(
    event: SpikeEvent,
    out_h: usize,
    out_w: usize,
) -> Result<Vec<NeuronUpdate>> {
    if event.row >= out_h || event.col >= out_w {
        return Err(Error::OutOfRange {
            context: "spike event position",
            index: event.row * out_w + event.col,
            limit: out_h * out_w,
        });
    }
    let mut updates = Vec::with_capacity(9);
    for_each_update(event.row, event.col, out_h, out_w, |r, c, ky, kx| {
        updates.push(NeuronUpdate {
            row: r,
            col: c,
            ky,
            kx,
        })
    });
    Ok(updates)
}

/// Output channels owned by the neural core at `offset`: every
/// `nc_count`-th channel starting from `offset`.
pub fn nc_channels(offset: usize, nc_count: usize, out_channels: usize) -> Result<Vec<usize>> {
    if nc_count == 0 {
        return Err(Error::InvalidParam {
            context: "nc_count must be at least 1",
        });
    }
    if offset >= nc_count {
        return Err(Error::OutOfRange {
            context: "neural core offset",
            index: offset,
            limit: nc_count,
        });
    }
    Ok((offset..out_channels).step_by(nc_count).collect())
}

/// Cycle and spike accounting for one sparse layer pass.
#[derive(Debug, Clone, Default)]
pub struct SparseStats {
    /// Input spikes per plane, in plane-address order.
    pub input_plane_spikes: Vec<u64>,
    /// Total ECU scan cycles across all input planes and timesteps.
    pub compression_cycles: u64,
    /// Accumulation cycles per neural core (one neuron update per cycle).
    pub per_nc_accumulation_cycles: Vec<u64>,
    /// Spiking-phase cycles per neural core.
    pub per_nc_activation_cycles: Vec<u64>,
    pub output_spikes: u64,
}

impl SparseStats {
    pub fn total_input_spikes(&self) -> u64 {
        self.input_plane_spikes.iter().sum()
    }

    pub fn max_accumulation_cycles(&self) -> u64 {
        self.per_nc_accumulation_cycles
            .iter()
            .copied()
            .max()
            .unwrap_or(0)
    }
}

fn layer_cycles_from(stats: &SparseStats, cfg: &SparseCoreConfig) -> u64 {
    let busiest = stats
        .per_nc_accumulation_cycles
        .iter()
        .zip(&stats.per_nc_activation_cycles)
        .map(|(a, b)| a + b)
        .max()
        .unwrap_or(0);
    if cfg.overlap() {
        // The ECU pipeline and the NC update/activation pipelines run
        // concurrently; the layer is done when both are.
        busiest.max(stats.compression_cycles)
    } else {
        busiest + stats.compression_cycles
    }
}

/// Result of one event-driven CONV layer pass.
#[derive(Debug, Clone)]
pub struct SparseConvRun {
    pub train: SpikeTrain,
    pub cycles: u64,
    pub stats: SparseStats,
}

/// Simulate one spiking CONV layer on the sparse core.
///
/// Functionally equivalent to a dense convolution of the binary input
/// followed by the LIF step; the event-driven path only changes how the
/// work (and therefore the cycle count) is laid out.
pub fn simulate_sparse_conv(
    layer: &ConvLayerSpec,
    cfg: &SparseCoreConfig,
    input: &SpikeTrain,
    params: &LifParams,
) -> Result<SparseConvRun> {
    if input.channels() != layer.in_channels() {
        return Err(Error::ShapeMismatch {
            context: "sparse conv input channel count",
        });
    }
    if cfg.nc_count() > layer.out_channels() {
        return Err(Error::InvalidParam {
            context: "more neural cores than output channels",
        });
    }
    let (h, w) = (input.height(), input.width());
    let (c_in, c_out, t_len) = (layer.in_channels(), layer.out_channels(), input.timesteps());

    let mut train = SpikeTrain::new(t_len, c_out, h, w);
    let mut stats = SparseStats {
        input_plane_spikes: vec![0; c_in * t_len],
        ..SparseStats::default()
    };

    let mut states: Vec<LifState> = (0..c_out).map(|_| LifState::new(h, w)).collect();
    let mut acc = vec![0.0f64; h * w];
    // (flat output index, ky, kx) per update, grouped by input plane.
    let mut plane_updates: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); c_in];
    let mut total_updates = 0u64;

    for t in 0..t_len {
        for (ic, updates) in plane_updates.iter_mut().enumerate() {
            let plane = input.plane(ic, t)?;
            let (events, comp) = compress(plane, cfg.chunk_bits())?;
            stats.compression_cycles += comp;
            stats.input_plane_spikes[ic * t_len + t] = events.len() as u64;
            updates.clear();
            for ev in &events {
                for_each_update(ev.row, ev.col, h, w, |r, c, ky, kx| {
                    updates.push((r * w + c, ky, kx));
                });
            }
            total_updates += updates.len() as u64;
        }

        for (oc, state) in states.iter_mut().enumerate() {
            acc.fill(0.0);
            for (ic, updates) in plane_updates.iter().enumerate() {
                let wbase = (oc * c_in + ic) * 9;
                for &(flat, ky, kx) in updates {
                    acc[flat] += layer.weights().value(wbase + ky * 3 + kx);
                }
            }
            let spikes = lif_plane_step(state, &acc, layer.bias(oc), params)?;
            train.set_plane(oc, t, spikes)?;
        }
    }

    // Each NC walks every update once per output channel it owns; the
    // spiking phase costs one cycle per neuron per output plane.
    let activation_per_channel = (h * w * t_len) as u64;
    for offset in 0..cfg.nc_count() {
        let owned = nc_channels(offset, cfg.nc_count(), c_out)?.len() as u64;
        stats.per_nc_accumulation_cycles.push(owned * total_updates);
        stats
            .per_nc_activation_cycles
            .push(owned * activation_per_channel);
    }
    stats.output_spikes = train.total_spikes();

    let cycles = layer_cycles_from(&stats, cfg);
    Ok(SparseConvRun {
        train,
        cycles,
        stats,
    })
}

/// One fully connected layer.
#[derive(Debug, Clone, PartialEq)]
pub struct FcLayerSpec {
    in_neurons: usize,
    out_neurons: usize,
    weights: Coefficients,
    bias: Coefficients,
}

impl FcLayerSpec {
    /// Weights are `[out, in]`, bias is `[out]`.
    pub fn new(
        in_neurons: usize,
        out_neurons: usize,
        weights: Coefficients,
        bias: Coefficients,
    ) -> Result<Self> {
        if in_neurons == 0 || out_neurons == 0 {
            return Err(Error::InvalidParam {
                context: "fc layer needs at least one input and output neuron",
            });
        }
        if weights.dims() != [out_neurons, in_neurons] {
            return Err(Error::ShapeMismatch {
                context: "fc weights must be [out, in]",
            });
        }
        if bias.dims() != [out_neurons] {
            return Err(Error::ShapeMismatch {
                context: "fc bias must have one entry per output neuron",
            });
        }
        Ok(Self {
            in_neurons,
            out_neurons,
            weights,
            bias,
        })
    }

    pub fn in_neurons(&self) -> usize {
        self.in_neurons
    }

    pub fn out_neurons(&self) -> usize {
        self.out_neurons
    }

    pub fn weights(&self) -> &Coefficients {
        &self.weights
    }

    pub fn bias_coeffs(&self) -> &Coefficients {
        &self.bias
    }

    #[inline]
    pub fn weight(&self, out: usize, inp: usize) -> f64 {
        self.weights.value(out * self.in_neurons + inp)
    }

    #[inline]
    pub fn bias(&self, out: usize) -> f64 {
        self.bias.value(out)
    }

    pub fn pre_dequantized(&self) -> Self {
        Self {
            in_neurons: self.in_neurons,
            out_neurons: self.out_neurons,
            weights: Coefficients::Real(self.weights.to_real()),
            bias: Coefficients::Real(self.bias.to_real()),
        }
    }
}

/// Result of one event-driven FC layer pass.
#[derive(Debug, Clone)]
pub struct SparseFcRun {
    /// Output spikes as `out_neurons` one-bit planes per timestep.
    pub train: SpikeTrain,
    /// Spikes per output neuron summed over all timesteps.
    pub spike_counts: Vec<u64>,
    /// Final membrane potential per output neuron.
    pub membrane: Vec<f64>,
    pub cycles: u64,
    pub stats: SparseStats,
}

/// Simulate one FC layer on the sparse core.
///
/// The input spike train is consumed flattened (channel-major,
/// row-major); every input spike adds its weight column into all output
/// potentials, one neuron update per cycle per neural core.
pub fn simulate_sparse_fc(
    layer: &FcLayerSpec,
    cfg: &SparseCoreConfig,
    input: &SpikeTrain,
    params: &LifParams,
) -> Result<SparseFcRun> {
    let flat_len = input.channels() * input.height() * input.width();
    if flat_len != layer.in_neurons() {
        return Err(Error::ShapeMismatch {
            context: "fc input length",
        });
    }
    if cfg.nc_count() > layer.out_neurons() {
        return Err(Error::InvalidParam {
            context: "more neural cores than output neurons",
        });
    }
    let (t_len, c_in, out) = (input.timesteps(), input.channels(), layer.out_neurons());
    let plane_bits = input.height() * input.width();

    let mut train = SpikeTrain::new(t_len, out, 1, 1);
    let mut stats = SparseStats {
        input_plane_spikes: vec![0; c_in * t_len],
        ..SparseStats::default()
    };
    let mut membrane = vec![0.0f64; out];
    let mut spike_counts = vec![0u64; out];
    let mut acc = vec![0.0f64; out];
    let mut total_spikes = 0u64;

    for t in 0..t_len {
        acc.fill(0.0);
        for ic in 0..c_in {
            let plane = input.plane(ic, t)?;
            let (events, comp) = compress(plane, cfg.chunk_bits())?;
            stats.compression_cycles += comp;
            stats.input_plane_spikes[ic * t_len + t] = events.len() as u64;
            total_spikes += events.len() as u64;
            for ev in &events {
                let flat_in = ic * plane_bits + ev.row * input.width() + ev.col;
                for (j, a) in acc.iter_mut().enumerate() {
                    *a += layer.weight(j, flat_in);
                }
            }
        }
        for j in 0..out {
            let (u, fired) = lif_step(membrane[j], acc[j] + layer.bias(j), params)?;
            membrane[j] = u;
            if fired {
                spike_counts[j] += 1;
                let mut plane = BitPlane::new(1, 1);
                plane.set(0, 0, true);
                train.set_plane(j, t, plane)?;
            }
        }
    }

    for offset in 0..cfg.nc_count() {
        let owned = nc_channels(offset, cfg.nc_count(), out)?.len() as u64;
        stats.per_nc_accumulation_cycles.push(owned * total_spikes);
        stats.per_nc_activation_cycles.push(owned * t_len as u64);
    }
    stats.output_spikes = spike_counts.iter().sum();

    let cycles = layer_cycles_from(&stats, cfg);
    Ok(SparseFcRun {
        train,
        spike_counts,
        membrane,
        cycles,
        stats,
    })
}

/// OR-gate max-pooling over a binary plane.
pub fn maxpool_spikes(plane: &BitPlane, z: usize) -> Result<BitPlane> {
    if z == 0 {
        return Err(Error::InvalidParam {
            context: "pool size must be at least 1",
        });
    }
    if !plane.height().is_multiple_of(z) || !plane.width().is_multiple_of(z) {
        return Err(Error::ShapeMismatch {
            context: "plane dims must divide the pool size",
        });
    }
    let (oh, ow) = (plane.height() / z, plane.width() / z);
    let mut out = BitPlane::new(oh, ow);
    for r in 0..oh {
        for c in 0..ow {
            let mut any = false;
            'window: for dy in 0..z {
                for dx in 0..z {
                    if plane.get(r * z + dy, c * z + dx) {
                        any = true;
                        break 'window;
                    }
                }
            }
            out.set(r, c, any);
        }
    }
    Ok(out)
}

/// Pool every plane of a spike train.
pub fn maxpool_train(train: &SpikeTrain, z: usize) -> Result<SpikeTrain> {
    let mut out = SpikeTrain::new(
        train.timesteps(),
        train.channels(),
        train.height() / z,
        train.width() / z,
    );
    for c in 0..train.channels() {
        for t in 0..train.timesteps() {
            out.set_plane(c, t, maxpool_spikes(train.plane(c, t)?, z)?)?;
        }
    }
    Ok(out)
}
