//! Model file: a JSON manifest binding a topology string to weight/bias
//! blobs (SNNT files, paths relative to the manifest), per-layer
//! quantization parameters and the run-wide neuron constants.
//!
//! Every blob is validated against the topology-derived shape before any
//! simulation starts, and quantized blobs must honor their declared bit
//! width (integral values in the signed range).

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use spikesim_core::dense::ConvLayerSpec;
use spikesim_core::neuron::LifParams;
use spikesim_core::oracle::{Layer, NetworkSpec};
use spikesim_core::quant::{Coefficients, QuantParams, QuantTensor};
use spikesim_core::sparse::FcLayerSpec;
use spikesim_core::tensor::Tensor;

use super::snnt;
use crate::topology::{parse_topology, plan_layers, PlannedLayer};
use crate::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModel {
    pub topology: String,
    pub input_shape: [usize; 3],
    pub classes: usize,
    pub population: usize,
    pub timesteps: usize,
    pub lif: RawLif,
    pub layers: Vec<RawLayer>,
}

#[derive(Debug, Deserialize)]
pub struct RawLif {
    pub beta: f64,
    pub theta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLayer {
    pub weights: String,
    pub bias: String,
    #[serde(default)]
    pub quant: Option<RawQuant>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawQuant {
    pub bit_width: u8,
    pub scale_factor: f64,
    pub zero_point: i32,
}

/// A model ready to simulate.
#[derive(Debug)]
pub struct LoadedModel {
    pub net: NetworkSpec,
    pub lif: LifParams,
}

fn to_quant_tensor(t: &Tensor, raw: RawQuant, what: &str) -> Result<QuantTensor> {
    let params = QuantParams::new(raw.bit_width, raw.scale_factor, raw.zero_point)
        .map_err(|e| CliError::Format(format!("{what}: {e}")))?;
    let mut values = Vec::with_capacity(t.len());
    for (i, &v) in t.data().iter().enumerate() {
        if v.fract() != 0.0 {
            return Err(CliError::Format(format!(
                "{what}: value {v} at index {i} is not an integer but the layer declares {}-bit weights",
                raw.bit_width
            )));
        }
        values.push(v as i32);
    }
    QuantTensor::new(values, t.dims(), params).map_err(|e| CliError::Format(format!("{what}: {e}")))
}

fn load_coefficients(
    base: &Path,
    file: &str,
    expected_dims: &[usize],
    quant: Option<RawQuant>,
    what: &str,
) -> Result<Coefficients> {
    let path = base.join(file);
    let tensor = snnt::load_tensor(&path)?;
    if tensor.dims() != expected_dims {
        return Err(CliError::Format(format!(
            "{what} ({}): dims {:?} do not match the topology-derived {:?}",
            path.display(),
            tensor.dims(),
            expected_dims
        )));
    }
    Ok(match quant {
        Some(raw) => Coefficients::Quant(to_quant_tensor(&tensor, raw, what)?),
        None => Coefficients::Real(tensor),
    })
}

/// Build a network from planned layers plus per-weighted-layer
/// coefficients (weights, bias).
pub fn build_network(
    plans: &[PlannedLayer],
    mut coeffs: impl Iterator<Item = Result<(Coefficients, Coefficients)>>,
    input_shape: (usize, usize, usize),
    timesteps: usize,
    population: usize,
    classes: usize,
) -> Result<NetworkSpec> {
    let mut layers = Vec::with_capacity(plans.len());
    for plan in plans {
        let layer = match plan {
            PlannedLayer::Conv {
                in_channels,
                out_channels,
            } => {
                let (w, b) = coeffs.next().expect("one coeff pair per weighted layer")?;
                Layer::Conv(ConvLayerSpec::new(*in_channels, *out_channels, w, b)?)
            }
            PlannedLayer::Fc {
                in_neurons,
                out_neurons,
            } => {
                let (w, b) = coeffs.next().expect("one coeff pair per weighted layer")?;
                Layer::Fc(FcLayerSpec::new(*in_neurons, *out_neurons, w, b)?)
            }
            PlannedLayer::MaxPool { size } => Layer::MaxPool { size: *size },
        };
        layers.push(layer);
    }
    Ok(NetworkSpec::new(
        input_shape,
        layers,
        timesteps,
        population,
        classes,
    )?)
}

/// Parse and fully validate a model manifest, loading every blob.
pub fn load_model(path: &Path) -> Result<LoadedModel> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let raw: RawModel = serde_json::from_str(&text)
        .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    let base: PathBuf = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    load_model_raw(&raw, &base)
}

pub fn load_model_raw(raw: &RawModel, base: &Path) -> Result<LoadedModel> {
    let tokens = parse_topology(&raw.topology)?;
    let input_shape = (raw.input_shape[0], raw.input_shape[1], raw.input_shape[2]);
    let plans = plan_layers(&tokens, input_shape, raw.population, raw.classes)?;
    let weighted: Vec<&PlannedLayer> = plans.iter().filter(|p| p.is_weighted()).collect();
    if weighted.len() != raw.layers.len() {
        return Err(CliError::Format(format!(
            "topology has {} weighted layers but the manifest lists {}",
            weighted.len(),
            raw.layers.len()
        )));
    }

    // Fail fast: resolve and validate every blob before building.
    let mut coeffs: Vec<(Coefficients, Coefficients)> = Vec::with_capacity(weighted.len());
    for (idx, (plan, entry)) in weighted.iter().zip(&raw.layers).enumerate() {
        let wdims = plan.weight_dims().expect("weighted layer");
        let blen = plan.bias_len().expect("weighted layer");
        let w = load_coefficients(
            base,
            &entry.weights,
            &wdims,
            entry.quant,
            &format!("layer {idx} weights"),
        )?;
        let b = load_coefficients(
            base,
            &entry.bias,
            &[blen],
            entry.quant,
            &format!("layer {idx} bias"),
        )?;
        coeffs.push((w, b));
    }

    let lif = LifParams::new(raw.lif.beta, raw.lif.theta)?;
    let net = build_network(
        &plans,
        coeffs.into_iter().map(Ok),
        input_shape,
        raw.timesteps,
        raw.population,
        raw.classes,
    )?;
    Ok(LoadedModel { net, lif })
}
