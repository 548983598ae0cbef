//! Run configuration JSON: resource allocation, clocking, coding mode
//! and reporting knobs.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use spikesim_core::engine::{Coding, RunOptions};
use spikesim_core::report::AccountingMode;

use crate::{CliError, Result};

fn default_chunk_bits() -> usize {
    64
}

fn default_clock_hz() -> f64 {
    100_000_000.0
}

fn default_overlap() -> bool {
    true
}

fn default_fill() -> u64 {
    27
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// One entry per weighted layer: dense rows first under direct
    /// coding, neural cores everywhere else.
    pub allocation: Vec<u32>,
    #[serde(default = "default_chunk_bits")]
    pub chunk_bits: usize,
    #[serde(default = "default_clock_hz")]
    pub clock_hz: f64,
    #[serde(default)]
    pub coding: CodingConfig,
    #[serde(default)]
    pub seed: Option<u64>,
    /// `"int4"`, `"fp32"` or a power-table JSON path; energy reporting is
    /// skipped when absent.
    #[serde(default)]
    pub power: Option<String>,
    #[serde(default)]
    pub accounting: AccountingConfig,
    #[serde(default)]
    pub include_static_power: bool,
    #[serde(default = "default_overlap")]
    pub compression_overlap: bool,
    #[serde(default = "default_fill")]
    pub dense_pipeline_fill: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodingConfig {
    #[default]
    Direct,
    Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccountingConfig {
    #[default]
    Sequential,
    LayerPipelined,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coding == CodingConfig::Rate && self.seed.is_none() {
            return Err(CliError::Format(
                "rate coding requires a seed in the run config".into(),
            ));
        }
        if !matches!(self.chunk_bits, 8 | 16 | 32 | 64) {
            return Err(CliError::Format(
                "chunk_bits must be 8, 16, 32 or 64".into(),
            ));
        }
        Ok(())
    }

    pub fn accounting_mode(&self) -> AccountingMode {
        match self.accounting {
            AccountingConfig::Sequential => AccountingMode::Sequential,
            AccountingConfig::LayerPipelined => AccountingMode::LayerPipelined,
        }
    }

    pub fn run_options(&self) -> RunOptions {
        let mut opts = RunOptions::direct(self.allocation.clone());
        opts.chunk_bits = self.chunk_bits;
        opts.clock_hz = self.clock_hz;
        opts.coding = match self.coding {
            CodingConfig::Direct => Coding::Direct,
            CodingConfig::Rate => Coding::Rate,
        };
        opts.seed = self.seed;
        opts.compression_overlap = self.compression_overlap;
        opts.dense_pipeline_fill = self.dense_pipeline_fill;
        opts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_apply() {
        let cfg: RunConfig = serde_json::from_str(r#"{"allocation": [1, 2, 3]}"#).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.chunk_bits, 64);
        assert_eq!(cfg.clock_hz, 1e8);
        assert_eq!(cfg.coding, CodingConfig::Direct);
        assert!(cfg.compression_overlap);
        assert!(cfg.power.is_none());
    }

    #[test]
    fn rate_without_seed_rejected() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"allocation": [1], "coding": "rate"}"#).unwrap();
        assert!(cfg.validate().is_err());
        let cfg: RunConfig =
            serde_json::from_str(r#"{"allocation": [1], "coding": "rate", "seed": 3}"#).unwrap();
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"allocation": [1], "typo": 1}"#).is_err());
    }
}
