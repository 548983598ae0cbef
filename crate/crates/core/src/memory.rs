//! Timestep-major spike RAM layout and clock-gated-region accounting.
//!
//! Spike trains between layers live in on-chip RAM, one bit plane per
//! location, with the planes of one channel's consecutive timesteps at
//! contiguous addresses. A layer with `C` channels over `T` timesteps
//! therefore occupies exactly `C * T` locations.
//!
//! The RAM is split into two halves selected by the MSB of the address;
//! only the half being touched receives clock cycles. Gating is modeled
//! as per-region activity counters, which the energy model can weight.

use alloc::vec::Vec;

use crate::bits::BitPlane;
use crate::{Error, Result};

/// Location of the `(channel, timestep)` plane in the layer's spike RAM.
///
/// Timestep-major within a channel block: `channel * timesteps + timestep`.
pub fn plane_address(channel: usize, timestep: usize, timesteps: usize) -> Result<usize> {
    if timestep >= timesteps {
        return Err(Error::OutOfRange {
            context: "plane_address timestep",
            index: timestep,
            limit: timesteps,
        });
    }
    Ok(channel * timesteps + timestep)
}

/// A layer's full spike output: `C * T` bit planes of `H x W`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpikeTrain {
    timesteps: usize,
    channels: usize,
    h: usize,
    w: usize,
    planes: Vec<BitPlane>,
}

impl SpikeTrain {
    pub fn new(timesteps: usize, channels: usize, h: usize, w: usize) -> Self {
        let planes = (0..channels * timesteps)
            .map(|_| BitPlane::new(h, w))
            .collect();
        Self {
            timesteps,
            channels,
            h,
            w,
            planes,
        }
    }

    pub fn timesteps(&self) -> usize {
        self.timesteps
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.h
    }

    pub fn width(&self) -> usize {
        self.w
    }

    /// Number of RAM locations the train occupies.
    pub fn locations(&self) -> usize {
        self.planes.len()
    }

    fn address(&self, channel: usize, timestep: usize) -> Result<usize> {
        if channel >= self.channels {
            return Err(Error::OutOfRange {
                context: "spike train channel",
                index: channel,
                limit: self.channels,
            });
        }
        plane_address(channel, timestep, self.timesteps)
    }

    pub fn plane(&self, channel: usize, timestep: usize) -> Result<&BitPlane> {
        Ok(&self.planes[self.address(channel, timestep)?])
    }

    pub fn set_plane(&mut self, channel: usize, timestep: usize, plane: BitPlane) -> Result<()> {
        if plane.height() != self.h || plane.width() != self.w {
            return Err(Error::ShapeMismatch {
                context: "spike plane dims",
            });
        }
        let addr = self.address(channel, timestep)?;
        self.planes[addr] = plane;
        Ok(())
    }

    /// Planes in address order.
    pub fn planes(&self) -> &[BitPlane] {
        &self.planes
    }

    pub fn total_spikes(&self) -> u64 {
        self.planes.iter().map(BitPlane::count_ones).sum()
    }

    /// Popcount per plane, in address order.
    pub fn plane_spike_counts(&self) -> Vec<u64> {
        self.planes.iter().map(BitPlane::count_ones).collect()
    }
}

/// Memory primitive a region maps to. Pure label: it only steers
/// coefficient lookup in energy accounting, never behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum MemoryKind {
    #[default]
    Bram,
    Uram,
    Lutram,
}

/// Access counters for one clock-gated spike/membrane RAM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MemRegionStats {
    pub kind: MemoryKind,
    reads: u64,
    writes: u64,
    active: [u64; 2],
}

impl MemRegionStats {
    pub fn new(kind: MemoryKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn reads(&self) -> u64 {
        self.reads
    }

    pub fn writes(&self) -> u64 {
        self.writes
    }

    /// Active-cycle count for region 0 and region 1.
    pub fn active_region_cycles(&self) -> [u64; 2] {
        self.active
    }

    pub fn total_accesses(&self) -> u64 {
        self.reads + self.writes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    Read,
    Write,
}

/// Record one access to a clock-gated memory of `capacity` locations.
///
/// The region is the MSB of the address within `ceil(log2(capacity))`
/// bits; only that region's activity counter advances.
pub fn gated_access(
    address: usize,
    capacity: usize,
    access: Access,
    stats: &mut MemRegionStats,
) -> Result<u8> {
    if capacity < 2 || !capacity.is_multiple_of(2) {
        return Err(Error::InvalidParam {
            context: "gated memory capacity must be even and at least 2",
        });
    }
    if address >= capacity {
        return Err(Error::OutOfRange {
            context: "gated memory address",
            index: address,
            limit: capacity,
        });
    }
    let bits = usize::BITS - (capacity - 1).leading_zeros();
    let region = ((address >> (bits - 1)) & 1) as u8;
    stats.active[region as usize] += 1;
    match access {
        Access::Read => stats.reads += 1,
        Access::Write => stats.writes += 1,
    }
    Ok(region)
}
