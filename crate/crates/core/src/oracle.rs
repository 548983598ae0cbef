//! Brute-force functional reference.
//!
//! Plain nested-loop convolutions and per-timestep LIF evaluation, with
//! no notion of cycles, tiles or neural cores. The hardware-shaped
//! simulators must reproduce these spike trains bit for bit; the oracle
//! shares only the neuron module with them, and fixes the same
//! channel-major, row-major accumulation order so floating-point sums
//! agree exactly.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::ConvLayerSpec;
use crate::memory::SpikeTrain;
use crate::neuron::{lif_plane_step, lif_step, LifParams, LifState};
use crate::rng::SplitMix64;
use crate::sparse::{maxpool_train, FcLayerSpec};
use crate::tensor::Tensor;
use crate::{Error, Result};

/// One layer of a network.
#[derive(Debug, Clone)]
pub enum Layer {
    Conv(ConvLayerSpec),
    MaxPool { size: usize },
    Fc(FcLayerSpec),
}

/// A full network: ordered layers plus the coding parameters.
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    input_shape: (usize, usize, usize),
    layers: Vec<Layer>,
    timesteps: usize,
    population: usize,
    classes: usize,
}

impl NetworkSpec {
    /// Validates the dimension flow end to end: convolutions preserve the
    /// plane size (same padding), pools need divisible dims, FC layers
    /// consume the flattened activation, and the final layer must be an
    /// FC holding `population * classes` neurons.
    pub fn new(
        input_shape: (usize, usize, usize),
        layers: Vec<Layer>,
        timesteps: usize,
        population: usize,
        classes: usize,
    ) -> Result<Self> {
        if timesteps == 0 || population == 0 || classes == 0 {
            return Err(Error::InvalidParam {
                context: "timesteps, population and classes must be positive",
            });
        }
        if layers.is_empty() {
            return Err(Error::InvalidParam {
                context: "network needs at least one layer",
            });
        }
        if !matches!(layers.first(), Some(Layer::Conv(_))) {
            return Err(Error::InvalidParam {
                context: "first layer must be a convolution",
            });
        }
        let (mut c, mut h, mut w) = input_shape;
        if c == 0 || h == 0 || w == 0 {
            return Err(Error::InvalidParam {
                context: "input shape must be non-zero",
            });
        }
        let mut flattened = false;
        for layer in &layers {
            match layer {
                Layer::Conv(spec) => {
                    if flattened {
                        return Err(Error::ShapeMismatch {
                            context: "convolution after an fc layer",
                        });
                    }
                    if spec.in_channels() != c {
                        return Err(Error::ShapeMismatch {
                            context: "conv input channels do not match the incoming activation",
                        });
                    }
                    if h < spec.kernel() || w < spec.kernel() {
                        return Err(Error::ShapeMismatch {
                            context: "activation smaller than the filter",
                        });
                    }
                    c = spec.out_channels();
                }
                Layer::MaxPool { size } => {
                    if flattened {
                        return Err(Error::ShapeMismatch {
                            context: "pool after an fc layer",
                        });
                    }
                    if *size == 0 || h % size != 0 || w % size != 0 {
                        return Err(Error::ShapeMismatch {
                            context: "pool size must divide the activation dims",
                        });
                    }
                    h /= size;
                    w /= size;
                }
                Layer::Fc(spec) => {
                    let incoming = c * h * w;
                    if spec.in_neurons() != incoming {
                        return Err(Error::ShapeMismatch {
                            context: "fc input length does not match the flattened activation",
                        });
                    }
                    c = spec.out_neurons();
                    h = 1;
                    w = 1;
                    flattened = true;
                }
            }
        }
        match layers.last() {
            Some(Layer::Fc(spec)) if spec.out_neurons() == population * classes => {}
            _ => {
                return Err(Error::ShapeMismatch {
                    context: "final layer must be an fc with population * classes neurons",
                })
            }
        }
        Ok(Self {
            input_shape,
            layers,
            timesteps,
            population,
            classes,
        })
    }

    pub fn input_shape(&self) -> (usize, usize, usize) {
        self.input_shape
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn timesteps(&self) -> usize {
        self.timesteps
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Number of weighted (conv or fc) layers.
    pub fn weighted_count(&self) -> usize {
        self.layers
            .iter()
            .filter(|l| !matches!(l, Layer::MaxPool { .. }))
            .count()
    }

    /// Same network evaluated over a different spike-train length.
    pub fn with_timesteps(&self, timesteps: usize) -> Result<Self> {
        Self::new(
            self.input_shape,
            self.layers.clone(),
            timesteps,
            self.population,
            self.classes,
        )
    }
}

/// What a weighted layer consumed during a forward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum LayerKind {
    /// First convolution fed with the raw image every timestep.
    InputConv,
    /// Spike-driven convolution.
    Conv,
    /// Spike-driven fully connected layer.
    Fc,
}

/// Network input: direct coding repeats the raw image each timestep,
/// rate coding supplies a pre-encoded spike train.
#[derive(Debug, Clone)]
pub enum NetInput {
    Direct(Tensor),
    Spikes(SpikeTrain),
}

/// Spike output of one weighted layer during a reference pass.
#[derive(Debug, Clone)]
pub struct LayerTrace {
    pub kind: LayerKind,
    pub train: SpikeTrain,
    /// Spikes the layer consumed (0 for the direct-coded input layer).
    pub input_spikes: u64,
    pub output_spikes: u64,
}

/// Full result of a reference forward pass.
#[derive(Debug, Clone)]
pub struct ForwardRun {
    pub layers: Vec<LayerTrace>,
    pub class_spike_sums: Vec<u64>,
    pub prediction: usize,
}

/// Accumulate one output channel's pre-activation plane in the fixed
/// channel-major, row-major tap order.
fn gather_plane(
    layer: &ConvLayerSpec,
    h: usize,
    w: usize,
    fetch: impl Fn(usize, usize, usize) -> f64,
) -> Vec<Vec<f64>> {
    let mut planes = Vec::with_capacity(layer.out_channels());
    for oc in 0..layer.out_channels() {
        let mut plane = vec![0.0f64; h * w];
        for r in 0..h {
            for c in 0..w {
                let mut acc = 0.0;
                for ic in 0..layer.in_channels() {
                    for ky in 0..3usize {
                        let rr = r as isize + ky as isize - 1;
                        if rr < 0 || rr as usize >= h {
                            continue;
                        }
                        for kx in 0..3usize {
                            let cc = c as isize + kx as isize - 1;
                            if cc < 0 || cc as usize >= w {
                                continue;
                            }
                            acc +=
                                layer.weight(oc, ic, ky, kx) * fetch(ic, rr as usize, cc as usize);
                        }
                    }
                }
                plane[r * w + c] = acc;
            }
        }
        planes.push(plane);
    }
    planes
}

/// Direct nested-loop same-padded stride-1 convolution plus bias.
pub fn reference_conv(input: &Tensor, layer: &ConvLayerSpec) -> Result<Tensor> {
    let dims = input.dims();
    if dims.len() != 3 || dims[0] != layer.in_channels() {
        return Err(Error::ShapeMismatch {
            context: "reference conv input shape",
        });
    }
    if !input.all_finite() {
        return Err(Error::NonFinite {
            context: "reference conv input",
        });
    }
    let (h, w) = (dims[1], dims[2]);
    let planes = gather_plane(layer, h, w, |ic, r, c| input.at3(ic, r, c));
    let mut out = Tensor::zeros(&[layer.out_channels(), h, w]);
    for (oc, plane) in planes.iter().enumerate() {
        let bias = layer.bias(oc);
        for (i, &v) in plane.iter().enumerate() {
            out.data_mut()[oc * h * w + i] = v + bias;
        }
    }
    Ok(out)
}

/// Forward pass over the whole network, layer by layer and timestep by
/// timestep. Returns every weighted layer's spike train plus the
/// population-coded classification.
pub fn reference_forward(
    net: &NetworkSpec,
    input: &NetInput,
    params: &LifParams,
) -> Result<ForwardRun> {
    let (c0, h0, w0) = net.input_shape();
    let t_len = net.timesteps();

    let mut traces: Vec<LayerTrace> = Vec::new();
    let mut current: Option<SpikeTrain> = match input {
        NetInput::Direct(img) => {
            if img.dims() != [c0, h0, w0] {
                return Err(Error::ShapeMismatch {
                    context: "input image shape",
                });
            }
            if !img.all_finite() {
                return Err(Error::NonFinite {
                    context: "input image",
                });
            }
            None
        }
        NetInput::Spikes(train) => {
            if train.channels() != c0
                || train.height() != h0
                || train.width() != w0
                || train.timesteps() != t_len
            {
                return Err(Error::ShapeMismatch {
                    context: "input spike train shape",
                });
            }
            Some(train.clone())
        }
    };

    let mut fc_counts: Option<Vec<u64>> = None;

    for layer in net.layers() {
        match layer {
            Layer::Conv(spec) => {
                let (kind, train) = match (&current, input) {
                    (None, NetInput::Direct(img)) => {
                        // Direct coding: the same image drives every
                        // timestep, so the pre-activation is computed once
                        // per channel and re-used.
                        let planes = gather_plane(spec, h0, w0, |ic, r, c| img.at3(ic, r, c));
                        let mut train = SpikeTrain::new(t_len, spec.out_channels(), h0, w0);
                        for (oc, plane) in planes.iter().enumerate() {
                            let mut state = LifState::new(h0, w0);
                            for t in 0..t_len {
                                let spikes =
                                    lif_plane_step(&mut state, plane, spec.bias(oc), params)?;
                                train.set_plane(oc, t, spikes)?;
                            }
                        }
                        (LayerKind::InputConv, train)
                    }
                    (Some(prev), _) => {
                        let (h, w) = (prev.height(), prev.width());
                        let mut train = SpikeTrain::new(t_len, spec.out_channels(), h, w);
                        let mut states: Vec<LifState> = (0..spec.out_channels())
                            .map(|_| LifState::new(h, w))
                            .collect();
                        for t in 0..t_len {
                            let planes = gather_plane(spec, h, w, |ic, r, c| {
                                f64::from(u8::from(
                                    prev.plane(ic, t).expect("validated dims").get(r, c),
                                ))
                            });
                            for (oc, plane) in planes.iter().enumerate() {
                                let spikes =
                                    lif_plane_step(&mut states[oc], plane, spec.bias(oc), params)?;
                                train.set_plane(oc, t, spikes)?;
                            }
                        }
                        (LayerKind::Conv, train)
                    }
                    (None, NetInput::Spikes(_)) => unreachable!("spike input sets current"),
                };
                let input_spikes = current.as_ref().map_or(0, SpikeTrain::total_spikes);
                traces.push(LayerTrace {
                    kind,
                    input_spikes,
                    output_spikes: train.total_spikes(),
                    train: train.clone(),
                });
                current = Some(train);
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
                let (h, w, c_in) = (prev.height(), prev.width(), prev.channels());
                if c_in * h * w != spec.in_neurons() {
                    return Err(Error::ShapeMismatch {
                        context: "fc input length",
                    });
                }
                let out = spec.out_neurons();
                let mut train = SpikeTrain::new(t_len, out, 1, 1);
                let mut membrane = vec![0.0f64; out];
                let mut counts = vec![0u64; out];
                for t in 0..t_len {
                    for (j, (u, count)) in membrane.iter_mut().zip(&mut counts).enumerate() {
                        let mut acc = 0.0;
                        for ic in 0..c_in {
                            let plane = prev.plane(ic, t)?;
                            for r in 0..h {
                                for col in 0..w {
                                    let flat_in = ic * h * w + r * w + col;
                                    acc += spec.weight(j, flat_in)
                                        * f64::from(u8::from(plane.get(r, col)));
                                }
                            }
                        }
                        let (next, fired) = lif_step(*u, acc + spec.bias(j), params)?;
                        *u = next;
                        if fired {
                            *count += 1;
                            let mut bit = crate::bits::BitPlane::new(1, 1);
                            bit.set(0, 0, true);
                            train.set_plane(j, t, bit)?;
                        }
                    }
                }
                let input_spikes = prev.total_spikes();
                traces.push(LayerTrace {
                    kind: LayerKind::Fc,
                    input_spikes,
                    output_spikes: train.total_spikes(),
                    train: train.clone(),
                });
                fc_counts = Some(counts);
                current = Some(train);
            }
        }
    }

    let counts = fc_counts.ok_or(Error::ShapeMismatch {
        context: "network ended without an fc layer",
    })?;
    let (prediction, class_spike_sums) = classify(&counts, net.population(), net.classes())?;
    Ok(ForwardRun {
        layers: traces,
        class_spike_sums,
        prediction,
    })
}

/// Population-coded classification: `population` neurons per class,
/// argmax of the per-class spike sums (ties go to the lowest class).
pub fn classify(
    spike_counts: &[u64],
    population: usize,
    classes: usize,
) -> Result<(usize, Vec<u64>)> {
    if population == 0 || classes == 0 || spike_counts.len() != population * classes {
        return Err(Error::ShapeMismatch {
            context: "spike counts do not cover population * classes",
        });
    }
    let sums: Vec<u64> = (0..classes)
        .map(|k| {
            spike_counts[k * population..(k + 1) * population]
                .iter()
                .sum()
        })
        .collect();
    let mut best = 0usize;
    for (k, &s) in sums.iter().enumerate() {
        if s > sums[best] {
            best = k;
        }
    }
    Ok((best, sums))
}

/// Bernoulli rate coding: each pixel spikes per timestep with
/// probability equal to its intensity, from a seeded deterministic
/// generator. Identical seeds give identical trains.
pub fn rate_encode(image: &Tensor, timesteps: usize, seed: u64) -> Result<SpikeTrain> {
    let dims = image.dims();
    if dims.len() != 3 {
        return Err(Error::ShapeMismatch {
            context: "rate coding expects a [C, H, W] image",
        });
    }
    if timesteps == 0 {
        return Err(Error::InvalidParam {
            context: "rate coding needs at least one timestep",
        });
    }
    for &v in image.data() {
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParam {
                context: "rate coding needs intensities in [0, 1]",
            });
        }
    }
    let (c_len, h, w) = (dims[0], dims[1], dims[2]);
    let mut rng = SplitMix64::new(seed);
    let mut train = SpikeTrain::new(timesteps, c_len, h, w);
    for t in 0..timesteps {
        for c in 0..c_len {
            let mut plane = crate::bits::BitPlane::new(h, w);
            for r in 0..h {
                for col in 0..w {
                    if rng.next_f64() < image.at3(c, r, col) {
                        plane.set(r, col, true);
                    }
                }
            }
            train.set_plane(c, t, plane)?;
        }
    }
    Ok(train)
}
