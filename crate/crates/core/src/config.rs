//! The single TOML configuration file: scenario, metrics and batch settings.
//!
//! Every field has a default, so an empty file is a valid configuration and
//! `Config::default_toml` reproduces the embedded defaults.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricsConfig;
use crate::scenario::{Condition, ScenarioConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seeds: Vec<u64>,
    /// Condition names or `strength-*` patterns; empty selects all seven.
    pub conditions: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { seeds: (1..=12).collect(), conditions: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub scenario: ScenarioConfig,
    pub metrics: MetricsConfig,
    pub run: RunConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn default_toml() -> String {
        Config::default().to_toml().expect("default configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.metrics.validate()?;
        self.conditions()?;
        Ok(())
    }

    /// Conditions selected by `run.conditions`, in table order, deduplicated.
    pub fn conditions(&self) -> Result<Vec<Condition>> {
        select_conditions(&self.run.conditions)
    }
}

/// Resolves names and `strength-*` patterns to conditions in table order.
pub fn select_conditions(patterns: &[String]) -> Result<Vec<Condition>> {
    if patterns.is_empty() {
        return Ok(Condition::all().to_vec());
    }
    let mut picked = Vec::new();
    for p in patterns {
        let hits = Condition::matching(p);
        if hits.is_empty() {
            return Err(Error::Config(format!("condition `{p}` matches nothing")));
        }
        picked.extend(hits);
    }
    Ok(Condition::all().into_iter().filter(|c| picked.contains(c)).collect())
}

/// Parses `3`, `1,2,5` or `1-12` (inclusive) into a seed list.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("cannot parse seed list `{text}`"));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad())?;
                let b: u64 = b.trim().parse().map_err(|_| bad())?;
                if b < a {
                    return Err(bad());
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(seeds)
}
