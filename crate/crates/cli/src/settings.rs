// SPDX-License-Identifier: Apache-2.0

//! Settings resolution: command-line flag, then config file, then default.

use std::path::{Path, PathBuf};

use infonet::sim::{Latency, SimConfig};
use serde::Deserialize;

use crate::CliError;

/// Keys accepted in the `--config` JSON file. Times are virtual
/// microseconds.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub peers: Option<usize>,
    pub seed: Option<u64>,
    pub latency: Option<LatencySetting>,
    pub period: Option<u64>,
    pub tfresh: Option<u64>,
    pub drop_rate: Option<f64>,
    pub k: Option<usize>,
    pub alpha: Option<usize>,
    pub trace: Option<PathBuf>,
    pub names: Option<PathBuf>,
    pub key: Option<PathBuf>,
}

/// Either a plain number of micros or the `MIN..MAX` string form.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum LatencySetting {
    Micros(u64),
    Text(String),
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub peers: Option<usize>,
    pub seed: Option<u64>,
    pub latency: Option<Latency>,
    pub period: Option<u64>,
    pub tfresh: Option<u64>,
    pub trace: Option<PathBuf>,
    pub names: Option<PathBuf>,
    pub key: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub sim: SimConfig,
    pub tfresh: u64,
    pub trace: Option<PathBuf>,
    pub names: Option<PathBuf>,
    pub key: Option<PathBuf>,
}

pub const DEFAULT_TFRESH: u64 = 30_000_000;

impl Settings {
    pub fn resolve(flags: Overrides, file: ConfigFile) -> Result<Self, CliError> {
        let base = SimConfig::default();
        let latency = match (flags.latency, file.latency) {
            (Some(l), _) => l,
            (None, Some(LatencySetting::Micros(d))) => Latency::Fixed(d),
            (None, Some(LatencySetting::Text(s))) => s.parse().map_err(|e| CliError::Usage(format!("config: {e}")))?,
            (None, None) => base.latency,
        };
        let drop_rate = file.drop_rate.unwrap_or(base.drop_rate);
        if !(0.0..=1.0).contains(&drop_rate) {
            return Err(CliError::Usage(format!("config: drop_rate {drop_rate} is outside [0, 1]")));
        }
        let trace = flags.trace.or(file.trace);
        let sim = SimConfig {
            peers: flags.peers.or(file.peers).unwrap_or(base.peers),
            seed: flags.seed.or(file.seed).unwrap_or(base.seed),
            period: flags.period.or(file.period).unwrap_or(base.period),
            k: file.k.unwrap_or(base.k),
            alpha: file.alpha.unwrap_or(base.alpha),
            trace: trace.is_some(),
            latency,
            drop_rate,
            ..base
        };
        if sim.peers == 0 {
            return Err(CliError::Usage("need at least one peer".into()));
        }
        Ok(Settings {
            sim,
            tfresh: flags.tfresh.or(file.tfresh).unwrap_or(DEFAULT_TFRESH),
            trace,
            names: flags.names.or(file.names),
            key: flags.key.or(file.key),
        })
    }
}
