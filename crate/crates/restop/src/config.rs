//! Experiment configuration: a single JSON document describing product,
//! method, basis, scales, seed, and output destinations.
//!
//! Unknown keys are rejected so typos fail loudly. Scalar fields have
//! desk-scale defaults (N = N_test = 10^5, inner_count = 1000, seed = 7);
//! CLI flags may override them after parsing.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::backward::Method;
use crate::basis::{validate_combo, BasisFamily};
use crate::error::{Error, Result};
use crate::products::ProductSpec;

fn default_scale() -> usize {
    100_000
}

fn default_inner() -> usize {
    1000
}

fn default_seed() -> u64 {
    7
}

fn default_memory_cap() -> usize {
    3072
}

/// Output file destinations; every one is optional.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Experiment report JSON.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    /// Results CSV (appended; header written if the file is new).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Serialized continuation model JSON.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    /// Binary training path dump.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub product: ProductSpec,
    pub method: Method,
    pub basis: BasisFamily,
    /// Training paths.
    #[serde(rename = "N", default = "default_scale")]
    pub n_train: usize,
    /// Out-of-sample paths for the lower bound; 0 skips bound estimation.
    #[serde(rename = "N_test", default = "default_scale")]
    pub n_test: usize,
    /// Inner paths per (outer path, date) in the dual bound.
    #[serde(default = "default_inner")]
    pub inner_count: usize,
    /// Also compute the dual upper bound.
    #[serde(default)]
    pub upper: bool,
    /// Outer paths for the dual; defaults to min(N_test, 10^4).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_outer: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "is_default_out")]
    pub out: OutputSpec,
    #[serde(default = "default_memory_cap")]
    pub memory_cap_mb: usize,
}

fn is_default_out(o: &OutputSpec) -> bool {
    *o == OutputSpec::default()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let p = crate::products::Product::new(self.product.clone())?;
        validate_combo(p.is_swap(), self.basis, self.method.reinforced())?;
        if self.n_train == 0 {
            return Err(Error::config("N must be positive"));
        }
        if self.upper && self.inner_count < 2 {
            return Err(Error::config("inner_count must be at least 2 for the dual bound"));
        }
        if self.memory_cap_mb == 0 {
            return Err(Error::config("memory_cap_mb must be positive"));
        }
        Ok(())
    }

    /// Outer path count for the dual bound.
    pub fn dual_outer_count(&self) -> usize {
        self.dual_outer.unwrap_or_else(|| self.n_test.clamp(1, 10_000))
    }

    /// Stable hash of the canonical JSON serialization (FNV-1a 64). Reports
    /// carry it so result rows can be traced back to exact configurations.
    pub fn config_hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in canon.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}
