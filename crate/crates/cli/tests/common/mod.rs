//! Shared helpers for the integration and acceptance suites.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use spikesim::formats::snnt;
use spikesim::topology::{parse_topology, plan_layers, PlannedLayer};
use spikesim_core::quant::Coefficients;
use spikesim_core::rng::SplitMix64;
use spikesim_core::tensor::Tensor;

pub fn gen_tensor(rng: &mut SplitMix64, dims: &[usize], lo: f64, hi: f64) -> Tensor {
    let mut t = Tensor::zeros(dims);
    for v in t.data_mut() {
        *v = lo + (hi - lo) * rng.next_f64();
    }
    t
}

/// Weight range that keeps pre-activations hovering around the firing
/// threshold for binary inputs.
pub fn weight_span(fan_in: usize) -> f64 {
    1.5 / (fan_in as f64).sqrt()
}

/// Build a network in memory from a topology string with seeded random
/// weights.
pub fn random_network(
    topology: &str,
    input_shape: (usize, usize, usize),
    population: usize,
    classes: usize,
    timesteps: usize,
    rng: &mut SplitMix64,
) -> spikesim_core::oracle::NetworkSpec {
    let tokens = parse_topology(topology).expect("valid topology");
    let plans = plan_layers(&tokens, input_shape, population, classes).expect("valid plan");
    let coeffs: Vec<_> = plans
        .iter()
        .filter(|p| p.is_weighted())
        .map(|p| {
            let wdims = p.weight_dims().unwrap();
            let fan_in: usize = wdims[1..].iter().product();
            let span = weight_span(fan_in);
            let w = gen_tensor(rng, &wdims, -span, span);
            let b = gen_tensor(rng, &[p.bias_len().unwrap()], -0.05, 0.1);
            Ok((Coefficients::Real(w), Coefficients::Real(b)))
        })
        .collect();
    spikesim::formats::model::build_network(
        &plans,
        coeffs.into_iter(),
        input_shape,
        timesteps,
        population,
        classes,
    )
    .expect("network builds")
}

pub struct ToyModelFiles {
    pub model: PathBuf,
    pub input: PathBuf,
}

/// Write a small three-weighted-layer model (conv, conv, fc), its blobs
/// and a random input image under `dir`.
pub fn write_toy_model(dir: &Path, seed: u64) -> ToyModelFiles {
    let mut rng = SplitMix64::new(seed);
    let topology = "4C3-MP2-4C3-6";
    let tokens = parse_topology(topology).unwrap();
    let plans = plan_layers(&tokens, (3, 8, 8), 3, 2).unwrap();

    let mut layer_entries = Vec::new();
    for (i, plan) in plans.iter().filter(|p| p.is_weighted()).enumerate() {
        let wdims = plan.weight_dims().unwrap();
        let fan_in: usize = wdims[1..].iter().product();
        let span = weight_span(fan_in);
        let weights = gen_tensor(&mut rng, &wdims, -span, span);
        let bias = gen_tensor(&mut rng, &[plan.bias_len().unwrap()], -0.05, 0.1);
        let wfile = format!("w{i}.snnt");
        let bfile = format!("b{i}.snnt");
        snnt::write_tensor(&dir.join(&wfile), &weights).unwrap();
        snnt::write_tensor(&dir.join(&bfile), &bias).unwrap();
        layer_entries.push(serde_json::json!({ "weights": wfile, "bias": bfile }));
    }

    let model_json = serde_json::json!({
        "topology": topology,
        "input_shape": [3, 8, 8],
        "classes": 2,
        "population": 3,
        "timesteps": 2,
        "lif": { "beta": 0.15, "theta": 0.5 },
        "layers": layer_entries,
    });
    let model = dir.join("model.json");
    std::fs::write(&model, serde_json::to_string_pretty(&model_json).unwrap()).unwrap();

    let image = gen_tensor(&mut rng, &[3, 8, 8], 0.0, 1.0);
    let input = dir.join("input.snnt");
    snnt::write_tensor(&input, &image).unwrap();

    ToyModelFiles { model, input }
}

/// Plans of the weighted layers of a topology, for sizing assertions.
pub fn weighted_plans(
    topology: &str,
    input_shape: (usize, usize, usize),
    population: usize,
    classes: usize,
) -> Vec<PlannedLayer> {
    let tokens = parse_topology(topology).unwrap();
    plan_layers(&tokens, input_shape, population, classes)
        .unwrap()
        .into_iter()
        .filter(|p| p.is_weighted())
        .collect()
}
