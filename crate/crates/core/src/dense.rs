//! Weight-stationary dense core for the direct-coded input layer.
//!
//! A fixed column of 27 PEs (3 input channels x 3x3 taps) produces one
//! output membrane accumulation per cycle; rows of the array tile across
//! output channels. The simulation is functional (spike trains) plus an
//! analytic cycle count; the systolic staggering detail is folded into a
//! single pipeline-fill constant.

use alloc::vec;
use alloc::vec::Vec;

use crate::memory::SpikeTrain;
use crate::neuron::{lif_plane_step, LifParams, LifState};
use crate::quant::Coefficients;
use crate::tensor::Tensor;
use crate::{Error, Result};

/// PEs in one dense-core row: 3 input channels x 3x3 filter taps.
pub const DENSE_PE_PER_ROW: usize = 27;

/// Default pipeline depth, dictated by the deepest shift register.
pub const DEFAULT_PIPELINE_FILL: u64 = 27;

pub const DEFAULT_CLOCK_HZ: f64 = 100_000_000.0;

/// Dense-core sizing knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseCoreConfig {
    rows: usize,
    pipeline_fill: u64,
    /// Extra control cycles when a row moves to the next output channel.
    tile_switch_overhead: u64,
    pub clock_hz: f64,
}

impl DenseCoreConfig {
    pub fn new(rows: usize) -> Result<Self> {
        if rows == 0 {
            return Err(Error::InvalidParam {
                context: "dense core needs at least one PE row",
            });
        }
        Ok(Self {
            rows,
            pipeline_fill: DEFAULT_PIPELINE_FILL,
            tile_switch_overhead: 0,
            clock_hz: DEFAULT_CLOCK_HZ,
        })
    }

    pub fn with_pipeline_fill(mut self, fill: u64) -> Self {
        self.pipeline_fill = fill;
        self
    }

    pub fn with_tile_switch_overhead(mut self, cycles: u64) -> Self {
        self.tile_switch_overhead = cycles;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn pipeline_fill(&self) -> u64 {
        self.pipeline_fill
    }
}

/// One convolution layer: 3x3 kernel, stride 1, same padding.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayerSpec {
    in_channels: usize,
    out_channels: usize,
    kernel: usize,
    weights: Coefficients,
    bias: Coefficients,
}

impl ConvLayerSpec {
    /// Weights are `[out, in, 3, 3]`, bias is `[out]`.
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        weights: Coefficients,
        bias: Coefficients,
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 {
            return Err(Error::InvalidParam {
                context: "conv layer needs at least one input and output channel",
            });
        }
        if weights.dims() != [out_channels, in_channels, 3, 3] {
            return Err(Error::ShapeMismatch {
                context: "conv weights must be [out, in, 3, 3]",
            });
        }
        if bias.dims() != [out_channels] {
            return Err(Error::ShapeMismatch {
                context: "conv bias must have one entry per output channel",
            });
        }
        Ok(Self {
            in_channels,
            out_channels,
            kernel: 3,
            weights,
            bias,
        })
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn weights(&self) -> &Coefficients {
        &self.weights
    }

    pub fn bias_coeffs(&self) -> &Coefficients {
        &self.bias
    }

    #[inline]
    pub fn weight(&self, out: usize, inp: usize, ky: usize, kx: usize) -> f64 {
        let flat = ((out * self.in_channels + inp) * 3 + ky) * 3 + kx;
        self.weights.value(flat)
    }

    #[inline]
    pub fn bias(&self, out: usize) -> f64 {
        self.bias.value(out)
    }

    /// Same layer with all coefficients dequantized up front.
    pub fn pre_dequantized(&self) -> Self {
        Self {
            in_channels: self.in_channels,
            out_channels: self.out_channels,
            kernel: self.kernel,
            weights: Coefficients::Real(self.weights.to_real()),
            bias: Coefficients::Real(self.bias.to_real()),
        }
    }
}

/// One PE's tap: which input channel and kernel displacement it owns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TapOffset {
    pub channel: usize,
    pub dy: isize,
    pub dx: isize,
}

/// Tap ordering of the 27-PE column: channel-major, then row-major
/// within the 3x3 kernel. This is also the fixed accumulation order that
/// makes floating-point results reproducible against the oracle.
pub fn tap_offsets(kernel: usize, in_channels: usize) -> Result<Vec<TapOffset>> {
    if kernel != 3 || in_channels != 3 {
        return Err(Error::InvalidParam {
            context: "dense core supports exactly 3 input channels with 3x3 filters",
        });
    }
    let mut taps = Vec::with_capacity(DENSE_PE_PER_ROW);
    for channel in 0..in_channels {
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                taps.push(TapOffset { channel, dy, dx });
            }
        }
    }
    Ok(taps)
}

/// Result of a dense-core layer pass.
#[derive(Debug, Clone)]
pub struct DenseRun {
    pub train: SpikeTrain,
    pub cycles: u64,
}

/// Analytic dense-core cycle count. Independent of image content: the
/// dense core is not event-driven.
pub fn dense_cycles(
    out_channels: usize,
    h: usize,
    w: usize,
    timesteps: usize,
    cfg: &DenseCoreConfig,
) -> u64 {
    let tiles = out_channels.div_ceil(cfg.rows) as u64;
    let per_pass = (h * w) as u64 + cfg.pipeline_fill;
    timesteps as u64 * tiles * per_pass + tiles * cfg.tile_switch_overhead
}

/// Simulate the direct-coded input layer.
///
/// The raw image is fed every timestep (direct coding); membrane
/// potentials persist across the timesteps of one output channel and are
/// reset when a row tiles onward to its next channel.
pub fn simulate_dense(
    layer: &ConvLayerSpec,
    image: &Tensor,
    timesteps: usize,
    cfg: &DenseCoreConfig,
    params: &LifParams,
) -> Result<DenseRun> {
    if timesteps < 1 {
        return Err(Error::InvalidParam {
            context: "dense simulation needs at least one timestep",
        });
    }
    if layer.in_channels() != 3 {
        return Err(Error::InvalidParam {
            context: "dense core is input-layer specific: 3 input channels",
        });
    }
    let dims = image.dims();
    if dims.len() != 3 || dims[0] != layer.in_channels() {
        return Err(Error::ShapeMismatch {
            context: "dense input image must be [3, H, W]",
        });
    }
    let (h, w) = (dims[1], dims[2]);
    if h < layer.kernel() || w < layer.kernel() {
        return Err(Error::ShapeMismatch {
            context: "image smaller than the filter",
        });
    }
    if !image.all_finite() {
        return Err(Error::NonFinite {
            context: "dense input image",
        });
    }

    let taps = tap_offsets(layer.kernel(), layer.in_channels())?;
    let mut train = SpikeTrain::new(timesteps, layer.out_channels(), h, w);
    let mut acc = vec![0.0f64; h * w];

    for oc in 0..layer.out_channels() {
        // Direct coding repeats the same image, so one accumulation pass
        // serves every timestep of this channel.
        for r in 0..h {
            for c in 0..w {
                let mut sum = 0.0;
                for tap in &taps {
                    let rr = r as isize + tap.dy;
                    let cc = c as isize + tap.dx;
                    if rr < 0 || cc < 0 || rr as usize >= h || cc as usize >= w {
                        continue; // zero padding
                    }
                    let wgt = layer.weight(
                        oc,
                        tap.channel,
                        (tap.dy + 1) as usize,
                        (tap.dx + 1) as usize,
                    );
                    sum += wgt * image.at3(tap.channel, rr as usize, cc as usize);
                }
                acc[r * w + c] = sum;
            }
        }
        let mut state = LifState::new(h, w);
        for t in 0..timesteps {
            let spikes = lif_plane_step(&mut state, &acc, layer.bias(oc), params)?;
            train.set_plane(oc, t, spikes)?;
        }
    }

    let cycles = dense_cycles(layer.out_channels(), h, w, timesteps, cfg);
    Ok(DenseRun { train, cycles })
}

/// Wall-clock seconds for a cycle count at a given clock.
pub fn dense_throughput(cycles: u64, clock_hz: f64) -> Result<f64> {
    if !(clock_hz.is_finite() && clock_hz > 0.0) {
        return Err(Error::InvalidParam {
            context: "clock frequency must be positive",
        });
    }
    Ok(cycles as f64 / clock_hz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quant::Coefficients;

    fn real_layer(out: usize, weights: Vec<f64>, bias: Vec<f64>) -> ConvLayerSpec {
        ConvLayerSpec::new(
            3,
            out,
            Coefficients::Real(Tensor::from_vec(&[out, 3, 3, 3], weights).unwrap()),
            Coefficients::Real(Tensor::from_vec(&[out], bias).unwrap()),
        )
        .unwrap()
    }

    fn lif() -> LifParams {
        LifParams::new(0.15, 0.5).unwrap()
    }

    #[test]
    fn tap_ordering_is_channel_major_row_major() {
        let taps = tap_offsets(3, 3).unwrap();
        assert_eq!(taps.len(), 27);
        assert_eq!(
            taps[0],
            TapOffset {
                channel: 0,
                dy: -1,
                dx: -1
            }
        );
        // 14th element: second channel's center tap.
        assert_eq!(
            taps[13],
            TapOffset {
                channel: 1,
                dy: 0,
                dx: 0
            }
        );
        assert!(tap_offsets(5, 3).is_err());
        assert!(tap_offsets(3, 4).is_err());
    }

    #[test]
    fn cycle_model_matches_formula() {
        // 32x32 image, 64 output channels, one row, two timesteps.
        let cfg = DenseCoreConfig::new(1).unwrap();
        assert_eq!(dense_cycles(64, 32, 32, 2, &cfg), 134_528);
        // rows == out_channels collapses to a single tile pass.
        let cfg = DenseCoreConfig::new(64).unwrap();
        assert_eq!(dense_cycles(64, 32, 32, 2, &cfg), 2 * (1024 + 27));
        // Partial last tile still costs a full pass.
        let cfg = DenseCoreConfig::new(3).unwrap();
        assert_eq!(dense_cycles(4, 4, 4, 1, &cfg), 2 * (16 + 27));
    }

    #[test]
    fn zero_image_zero_bias_never_spikes() {
        let layer = real_layer(2, vec![0.5; 2 * 27], vec![0.0; 2]);
        let image = Tensor::zeros(&[3, 4, 4]);
        let cfg = DenseCoreConfig::new(1).unwrap();
        let run = simulate_dense(&layer, &image, 2, &cfg, &lif()).unwrap();
        assert_eq!(run.train.total_spikes(), 0);
        assert_eq!(run.cycles, 2 * 2 * (16 + 27));
    }

    #[test]
    fn cycles_ignore_image_content() {
        let layer = real_layer(2, vec![0.3; 2 * 27], vec![0.1; 2]);
        let cfg = DenseCoreConfig::new(2).unwrap();
        let a = simulate_dense(&layer, &Tensor::zeros(&[3, 5, 5]), 2, &cfg, &lif()).unwrap();
        let mut img = Tensor::zeros(&[3, 5, 5]);
        img.data_mut().iter_mut().for_each(|v| *v = 0.9);
        let b = simulate_dense(&layer, &img, 2, &cfg, &lif()).unwrap();
        assert_eq!(a.cycles, b.cycles);
        assert_ne!(a.train.total_spikes(), b.train.total_spikes());
    }

    #[test]
    fn spikes_do_not_depend_on_row_count() {
        let mut weights = vec![0.0; 3 * 27];
        for (i, w) in weights.iter_mut().enumerate() {
            *w = ((i * 37) % 17) as f64 / 17.0 - 0.45;
        }
        let layer = real_layer(3, weights, vec![0.05, -0.02, 0.1]);
        let mut img = Tensor::zeros(&[3, 6, 6]);
        for (i, v) in img.data_mut().iter_mut().enumerate() {
            *v = ((i * 13) % 11) as f64 / 11.0;
        }
        let base =
            simulate_dense(&layer, &img, 3, &DenseCoreConfig::new(1).unwrap(), &lif()).unwrap();
        for rows in [2usize, 3, 4] {
            let run = simulate_dense(
                &layer,
                &img,
                3,
                &DenseCoreConfig::new(rows).unwrap(),
                &lif(),
            )
            .unwrap();
            assert_eq!(run.train, base.train, "rows={rows}");
        }
    }

    #[test]
    fn rejects_bad_shapes_and_timesteps() {
        let layer = real_layer(1, vec![0.0; 27], vec![0.0]);
        let cfg = DenseCoreConfig::new(1).unwrap();
        let image = Tensor::zeros(&[3, 4, 4]);
        assert!(simulate_dense(&layer, &image, 0, &cfg, &lif()).is_err());
        assert!(simulate_dense(&layer, &Tensor::zeros(&[2, 4, 4]), 1, &cfg, &lif()).is_err());
        assert!(simulate_dense(&layer, &Tensor::zeros(&[3, 2, 2]), 1, &cfg, &lif()).is_err());
        let mut bad = Tensor::zeros(&[3, 4, 4]);
        bad.data_mut()[0] = f64::NAN;
        assert!(simulate_dense(&layer, &bad, 1, &cfg, &lif()).is_err());
    }

    #[test]
    fn throughput_is_cycles_over_clock() {
        assert_eq!(dense_throughput(100, 100e6).unwrap(), 1e-6);
        assert!((dense_throughput(134_528, 100e6).unwrap() - 1.345_28e-3).abs() < 1e-12);
        assert_eq!(dense_throughput(0, 123.0).unwrap(), 0.0);
        assert!(dense_throughput(1, 0.0).is_err());
    }
}
