use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use spikesim::runner;
use spikesim::{CliError, Result};

/// Hybrid dense/sparse spiking-CNN accelerator simulator.
#[derive(Parser)]
#[command(name = "spikesim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full forward pass on the hybrid simulator.
    Simulate {
        /// Model manifest (JSON).
        #[arg(long)]
        model: PathBuf,
        /// Input image tensor (SNNT).
        #[arg(long)]
        input: PathBuf,
        /// Run configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cross-check every spike train against the reference; exits
        /// non-zero on any mismatch.
        #[arg(long)]
        verify: bool,
    },
    /// Measure the per-layer workload trace with the reference.
    Trace {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Trace CSV destination.
        #[arg(long)]
        out: PathBuf,
    },
    /// Balance a neural-core budget over a measured trace.
    Partition {
        /// Trace CSV from `spikesim trace`.
        #[arg(long)]
        trace: PathBuf,
        /// Total neural cores to spread across the sparse layers.
        #[arg(long)]
        budget: u32,
        /// Scale the balanced allocation by 2 or 4.
        #[arg(long)]
        scale: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare direct and rate coding on the same model and input.
    CompareCoding {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        timesteps_rate: usize,
        #[arg(long)]
        timesteps_direct: usize,
        /// Seed for the rate encoder.
        #[arg(long)]
        seed: u64,
        /// Power table: `int4`, `fp32` or a JSON path (default: uniform
        /// 1 W per layer).
        #[arg(long)]
        power: Option<String>,
        /// Optional run config supplying allocation/clock/chunk.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy/latency report from per-layer cycle counts.
    Report {
        /// Cycle input JSON: `{"clock_hz"?, "layers": [{"cycles", "spikes"?}]}`.
        #[arg(long)]
        cycles: PathBuf,
        /// Power table: `int4`, `fp32` or a JSON path.
        #[arg(long)]
        power: String,
        #[arg(long)]
        clock_hz: Option<f64>,
        /// Makespan is the slowest layer rather than the layer sum.
        #[arg(long)]
        pipelined: bool,
        /// Charge static power over the makespan.
        #[arg(long)]
        include_static: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<()> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Format(format!("serializing output: {e}")))?;
    if let Some(path) = out {
        std::fs::write(path, &json).map_err(|e| CliError::io(path, e))?;
    }
    println!("{json}");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            model,
            input,
            config,
            out,
            verify,
        } => {
            let report = runner::run_simulate(&model, &input, &config, verify)?;
            emit(&report, out.as_ref())
        }
        Command::Trace { model, input, out } => {
            let csv = runner::run_trace(&model, &input)?;
            std::fs::write(&out, &csv).map_err(|e| CliError::io(&out, e))?;
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Partition {
            trace,
            budget,
            scale,
            out,
        } => {
            let alloc = runner::run_partition(&trace, budget, scale)?;
            emit(&alloc, out.as_ref())
        }
        Command::CompareCoding {
            model,
            input,
            timesteps_rate,
            timesteps_direct,
            seed,
            power,
            config,
            out,
        } => {
            let cmp = runner::run_compare_coding(
                &model,
                &input,
                timesteps_rate,
                timesteps_direct,
                seed,
                power.as_deref(),
                config.as_deref(),
            )?;
            emit(&cmp, out.as_ref())
        }
        Command::Report {
            cycles,
            power,
            clock_hz,
            pipelined,
            include_static,
            out,
        } => {
            let report = runner::run_report(&cycles, &power, clock_hz, pipelined, include_static)?;
            emit(&report, out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
