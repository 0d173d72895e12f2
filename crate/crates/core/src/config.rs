//! Run configuration: one TOML document, every field optional.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::categories::{CategoryConfig, DEFAULT_PALETTE};
use crate::error::{Error, Result};
use crate::losses::LossWeights;
use crate::metrics::ApceConfig;
use crate::trafficlight::TlColorParams;

/// Environment variable consulted when no `--config` is given.
pub const CONFIG_ENV: &str = "FOALKIT_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixSettings {
    /// Probability of vertically flipping each pasted traffic-light instance
    /// in thermal-domain mixes.
    pub p_flip: f64,
}

impl Default for MixSettings {
    fn default() -> Self {
        MixSettings { p_flip: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub weights: LossWeights,
    pub categories: CategoryConfig,
    pub traffic_light: TlColorParams,
    pub apce: ApceConfig,
    pub mix: MixSettings,
    /// Category name to id.
    pub palette: BTreeMap<String, u8>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            weights: LossWeights::default(),
            categories: CategoryConfig::default(),
            traffic_light: TlColorParams::default(),
            apce: ApceConfig::default(),
            mix: MixSettings::default(),
            palette: DEFAULT_PALETTE.iter().map(|&(n, id)| (n.to_string(), id)).collect(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Parse { path: origin.to_path_buf(), message: e.to_string() })?;
        cfg.validate().map_err(|e| Error::Parse { path: origin.to_path_buf(), message: e.to_string() })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), message: e.to_string() })?;
        RunConfig::from_toml_str(&text, path)
    }

    /// Explicit path first, then the environment variable, then defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        if let Some(p) = explicit {
            return RunConfig::load(p);
        }
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => RunConfig::load(Path::new(&p)),
            _ => Ok(RunConfig::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        self.categories.validate()?;
        self.traffic_light.validate()?;
        self.apce.validate()?;
        if !(0.0..=1.0).contains(&self.mix.p_flip) {
            return Err(Error::InvalidParameter(format!("mix.p_flip must lie in [0, 1], got {}", self.mix.p_flip)));
        }
        let mut seen: BTreeMap<u8, &str> = BTreeMap::new();
        for (name, &id) in &self.palette {
            if let Some(prev) = seen.insert(id, name) {
                return Err(Error::InvalidParameter(format!("palette id {id} used by both `{prev}` and `{name}`")));
            }
        }
        Ok(())
    }

    /// Palette ids in ascending order.
    pub fn class_ids(&self) -> Vec<u8> {
        let mut ids: Vec<u8> = self.palette.values().copied().collect();
        ids.sort_unstable();
        ids
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
