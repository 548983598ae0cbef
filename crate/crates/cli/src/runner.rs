//! Orchestration behind the CLI subcommands: load inputs, run the
//! simulator or the reference, assemble serializable outputs.

use std::path::Path;

use serde::Serialize;

use spikesim_core::engine::{simulate_network, Coding, RunOptions, SimRun};
use spikesim_core::neuron::LifParams;
use spikesim_core::oracle::{
    rate_encode, reference_forward, ForwardRun, LayerKind, NetInput, NetworkSpec,
};
use spikesim_core::partition::{partition, scale_allocation, Allocation};
use spikesim_core::report::{
    compare_runs, energy_report, AccountingMode, PerfReport, PowerTable, RunComparison,
};
use spikesim_core::tensor::Tensor;

use crate::formats::config::{CodingConfig, RunConfig};
use crate::formats::model::{load_model, LoadedModel};
use crate::formats::report_io::{load_cycles, resolve_power_table};
use crate::formats::{snnt, trace};
use crate::{CliError, Result};

/// Per-layer row of the simulation report.
#[derive(Debug, Serialize)]
pub struct LayerSummary {
    pub kind: LayerKind,
    pub cycles: u64,
    pub seconds: f64,
    pub input_spikes: u64,
    pub output_spikes: u64,
    pub accumulation_cycles: u64,
    pub compression_cycles: u64,
    pub mem_reads: u64,
    pub mem_writes: u64,
    pub mem_region_active_cycles: [u64; 2],
}

/// JSON document emitted by `simulate`.
#[derive(Debug, Serialize)]
pub struct SimReport {
    pub coding: &'static str,
    pub timesteps: usize,
    pub prediction: usize,
    pub class_spike_sums: Vec<u64>,
    pub total_cycles: u64,
    pub latency_s: f64,
    pub throughput_fps: Option<f64>,
    pub total_spikes: u64,
    pub layers: Vec<LayerSummary>,
    /// Present when the run config selects a power table.
    pub energy: Option<PerfReport>,
    /// Present when `--verify` ran.
    pub verified: Option<bool>,
}

fn summarize(run: &SimRun) -> Vec<LayerSummary> {
    run.layers
        .iter()
        .map(|l| LayerSummary {
            kind: l.kind,
            cycles: l.cycles,
            seconds: l.seconds,
            input_spikes: l.input_spikes,
            output_spikes: l.output_spikes,
            accumulation_cycles: l.accumulation_cycles,
            compression_cycles: l.compression_cycles,
            mem_reads: l.mem.reads(),
            mem_writes: l.mem.writes(),
            mem_region_active_cycles: l.mem.active_region_cycles(),
        })
        .collect()
}

/// Bit-exact comparison of the simulated trains against the reference.
pub fn verify_against_oracle(run: &SimRun, oracle: &ForwardRun) -> Result<()> {
    if run.layers.len() != oracle.layers.len() {
        return Err(CliError::Verification(format!(
            "layer count mismatch: simulator {} vs oracle {}",
            run.layers.len(),
            oracle.layers.len()
        )));
    }
    for (idx, (s, o)) in run.layers.iter().zip(&oracle.layers).enumerate() {
        if s.train != o.train {
            return Err(CliError::Verification(format!(
                "layer {idx}: spike trains differ ({} vs {} spikes)",
                s.train.total_spikes(),
                o.train.total_spikes()
            )));
        }
    }
    if run.prediction != oracle.prediction {
        return Err(CliError::Verification(format!(
            "prediction mismatch: simulator {} vs oracle {}",
            run.prediction, oracle.prediction
        )));
    }
    Ok(())
}

fn oracle_input(image: &Tensor, opts: &RunOptions, timesteps: usize) -> Result<NetInput> {
    Ok(match opts.coding {
        Coding::Direct => NetInput::Direct(image.clone()),
        Coding::Rate => {
            let seed = opts
                .seed
                .ok_or(CliError::Format("rate coding requires a seed".into()))?;
            NetInput::Spikes(rate_encode(image, timesteps, seed)?)
        }
    })
}

pub fn run_simulate(
    model_path: &Path,
    input_path: &Path,
    config_path: &Path,
    verify: bool,
) -> Result<SimReport> {
    let LoadedModel { net, lif } = load_model(model_path)?;
    let image = snnt::load_tensor(input_path)?;
    let config = RunConfig::load(config_path)?;
    let opts = config.run_options();
    let run = simulate_network(&net, &image, &opts, &lif)?;

    let verified = if verify {
        let input = oracle_input(&image, &opts, net.timesteps())?;
        let oracle = reference_forward(&net, &input, &lif)?;
        verify_against_oracle(&run, &oracle)?;
        Some(true)
    } else {
        None
    };

    let energy = match &config.power {
        Some(selector) => {
            let base = config_path.parent().unwrap_or(Path::new("."));
            let table = resolve_power_table(selector, base)?;
            Some(energy_report(
                &run.layer_cycles(),
                &table,
                config.clock_hz,
                config.accounting_mode(),
                config.include_static_power,
            )?)
        }
        None => None,
    };

    Ok(SimReport {
        coding: match config.coding {
            CodingConfig::Direct => "direct",
            CodingConfig::Rate => "rate",
        },
        timesteps: run.timesteps,
        prediction: run.prediction,
        class_spike_sums: run.class_spike_sums.clone(),
        total_cycles: run.total_cycles,
        latency_s: run.latency_s,
        throughput_fps: (run.latency_s > 0.0).then(|| 1.0 / run.latency_s),
        total_spikes: run.total_spikes(),
        layers: summarize(&run),
        energy,
        verified,
    })
}

pub fn run_trace(model_path: &Path, input_path: &Path) -> Result<String> {
    let LoadedModel { net, lif } = load_model(model_path)?;
    let image = snnt::load_tensor(input_path)?;
    let measured = spikesim_core::partition::measure_trace(&net, &image, &lif)?;
    Ok(trace::encode_trace(&measured))
}

pub fn run_partition(trace_path: &Path, budget: u32, scale: Option<u32>) -> Result<Allocation> {
    let measured = trace::load_trace(trace_path)?;
    let alloc = partition(budget, &measured)?;
    match scale {
        Some(k) => Ok(scale_allocation(&alloc, k)?),
        None => Ok(alloc),
    }
}

/// One side of the coding comparison.
#[derive(Debug, Serialize)]
pub struct CodingRun {
    pub timesteps: usize,
    pub total_spikes: u64,
    pub total_cycles: u64,
    pub latency_s: f64,
    pub latency_ms: f64,
    pub dynamic_energy_j: f64,
    pub energy_mj: f64,
    pub throughput_fps: Option<f64>,
    pub prediction: usize,
}

/// JSON document emitted by `compare-coding`.
#[derive(Debug, Serialize)]
pub struct CodingComparison {
    pub power_table: String,
    pub direct: CodingRun,
    pub rate: CodingRun,
    /// Ratios are rate over direct, so e.g. `energy_ratio` is how many
    /// times more energy the rate-coded run spends.
    pub ratios: RunComparison,
    pub energy_improvement: f64,
    pub spike_ratio: f64,
}

fn coding_run(run: &SimRun, report: &PerfReport) -> CodingRun {
    CodingRun {
        timesteps: run.timesteps,
        total_spikes: run.total_spikes(),
        total_cycles: run.total_cycles,
        latency_s: report.makespan_s,
        latency_ms: report.makespan_s * 1e3,
        dynamic_energy_j: report.dynamic_energy_j,
        energy_mj: report.dynamic_energy_j * 1e3,
        throughput_fps: report.throughput_fps,
        prediction: run.prediction,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run_compare_coding(
    model_path: &Path,
    input_path: &Path,
    timesteps_rate: usize,
    timesteps_direct: usize,
    seed: u64,
    power: Option<&str>,
    config_path: Option<&Path>,
) -> Result<CodingComparison> {
    let LoadedModel { net, lif } = load_model(model_path)?;
    let image = snnt::load_tensor(input_path)?;

    let (allocation, chunk_bits, clock_hz) = match config_path {
        Some(path) => {
            let cfg = RunConfig::load(path)?;
            (cfg.allocation.clone(), cfg.chunk_bits, cfg.clock_hz)
        }
        None => (vec![1; net.weighted_count()], 64, 1e8),
    };

    let table = match power {
        Some(selector) => {
            resolve_power_table(selector, model_path.parent().unwrap_or(Path::new(".")))?
        }
        None => PowerTable::uniform(1.0, net.weighted_count())?,
    };

    let run_one = |net: &NetworkSpec, coding: Coding| -> Result<(SimRun, PerfReport)> {
        let mut opts = RunOptions::direct(allocation.clone());
        opts.chunk_bits = chunk_bits;
        opts.clock_hz = clock_hz;
        opts.coding = coding;
        if coding == Coding::Rate {
            opts.seed = Some(seed);
        }
        let run = simulate_network(net, &image, &opts, &lif)?;
        let report = energy_report(
            &run.layer_cycles(),
            &table,
            clock_hz,
            AccountingMode::Sequential,
            false,
        )?;
        Ok((run, report))
    };

    let direct_net = net.with_timesteps(timesteps_direct)?;
    let rate_net = net.with_timesteps(timesteps_rate)?;
    let (direct_run, direct_report) = run_one(&direct_net, Coding::Direct)?;
    let (rate_run, rate_report) = run_one(&rate_net, Coding::Rate)?;

    let ratios = compare_runs(&direct_report, &rate_report)?;
    Ok(CodingComparison {
        power_table: table.label().to_string(),
        direct: coding_run(&direct_run, &direct_report),
        rate: coding_run(&rate_run, &rate_report),
        energy_improvement: ratios.energy_ratio,
        spike_ratio: ratios.spike_ratio,
        ratios,
    })
}

pub fn run_report(
    cycles_path: &Path,
    power: &str,
    clock_hz: Option<f64>,
    pipelined: bool,
    include_static: bool,
) -> Result<PerfReport> {
    let cycles = load_cycles(cycles_path)?;
    let base = cycles_path.parent().unwrap_or(Path::new("."));
    let table = resolve_power_table(power, base)?;
    let clock = clock_hz.or(cycles.clock_hz).unwrap_or(1e8);
    let mode = if pipelined {
        AccountingMode::LayerPipelined
    } else {
        AccountingMode::Sequential
    };
    Ok(energy_report(
        &cycles.layers,
        &table,
        clock,
        mode,
        include_static,
    )?)
}

/// Shared by tests: run the reference only.
pub fn run_oracle(net: &NetworkSpec, image: &Tensor, lif: &LifParams) -> Result<ForwardRun> {
    Ok(reference_forward(
        net,
        &NetInput::Direct(image.clone()),
        lif,
    )?)
}
