//! Functional and cycle-level model of a hybrid spiking-neural-network
//! inference accelerator.
//!
//! The accelerator couples a weight-stationary dense core (for the
//! direct-coded input layer, which sees raw pixel data) with event-driven
//! sparse cores (for every spiking CONV/FC layer behind it). This crate
//! models both datapaths bit-exactly at the functional level and counts
//! cycles per the pipeline structure of each unit, so that resource knobs
//! (dense-core rows, neural cores per layer, compression chunk width) can
//! be swept without ever changing the computed spike trains.
//!
//! Module map:
//!
//! - [`neuron`]: leaky integrate-and-fire dynamics shared by every datapath.
//! - [`quant`]: integer weight handling, affine dequantization and the
//!   shift-and-add constant multiplier model.
//! - [`memory`]: timestep-major spike RAM layout and clock-gated-region
//!   activity accounting.
//! - [`dense`]: the 27-PE weight-stationary input-layer core.
//! - [`sparse`]: spike compression, scatter accumulation, OR max-pooling
//!   and the FC path.
//! - [`oracle`]: brute-force functional reference used to validate the
//!   hardware-shaped simulators.
//! - [`partition`]: layer-wise workload model and greedy neural-core
//!   balancing.
//! - [`report`]: latency/energy/throughput accounting with built-in power
//!   coefficient tables.
//! - [`engine`]: end-to-end network simulation tying the cores together.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats and the CLI
//! live in the companion `spikesim` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bits;
pub mod dense;
pub mod engine;
mod error;
pub mod memory;
pub mod neuron;
pub mod oracle;
pub mod partition;
pub mod quant;
pub mod report;
pub mod rng;
pub mod sparse;
pub mod tensor;

pub use error::{Error, Result};
