// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::dht::{EffectiveWidthParams, DEFAULT_ALPHA, DEFAULT_BRANCH_CAP, DEFAULT_K};

/// Per-hop message delay in virtual microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Latency {
    Fixed(u64),
    /// Uniform over the inclusive range.
    Uniform { min: u64, max: u64 },
}

impl Latency {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            Latency::Fixed(d) => d,
            Latency::Uniform { min, max } => rng.gen_range(min..=max),
        }
    }

    pub fn max(&self) -> u64 {
        match *self {
            Latency::Fixed(d) => d,
            Latency::Uniform { max, .. } => max,
        }
    }
}

impl fmt::Display for Latency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Latency::Fixed(d) => write!(f, "{d}"),
            Latency::Uniform { min, max } => write!(f, "{min}..{max}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid latency {0:?}: expected MICROS or MIN..MAX")]
pub struct ParseLatencyError(pub String);

impl FromStr for Latency {
    type Err = ParseLatencyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseLatencyError(s.to_owned());
        match s.split_once("..") {
            None => s.trim().parse().map(Latency::Fixed).map_err(|_| err()),
            Some((a, b)) => {
                let min: u64 = a.trim().parse().map_err(|_| err())?;
                let max: u64 = b.trim().parse().map_err(|_| err())?;
                if min > max {
                    return Err(err());
                }
                Ok(Latency::Uniform { min, max })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub peers: usize,
    pub latency: Latency,
    /// Probability in [0, 1] that any single message is lost.
    pub drop_rate: f64,
    /// Bucket size and replication factor.
    pub k: usize,
    /// Lookup parallelism.
    pub alpha: usize,
    pub rpc_timeout: u64,
    /// Peer-count estimate used for the routing prefix width; defaults to
    /// `peers`.
    pub estimated_peers: Option<usize>,
    pub k_slack: usize,
    pub branch_cap: usize,
    /// Maximum events processed by a single run call.
    pub event_budget: u64,
    /// Default standing-query re-poll period.
    pub period: u64,
    /// Per-session delivery queue bound; the oldest delivery is dropped
    /// when exceeded.
    pub queue_cap: Option<usize>,
    pub trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            peers: 16,
            latency: Latency::Fixed(10_000),
            drop_rate: 0.0,
            k: DEFAULT_K,
            alpha: DEFAULT_ALPHA,
            rpc_timeout: 200_000,
            estimated_peers: None,
            k_slack: EffectiveWidthParams::DEFAULT_K_SLACK,
            branch_cap: DEFAULT_BRANCH_CAP,
            event_budget: 50_000_000,
            period: 1_000_000,
            queue_cap: None,
            trace: false,
        }
    }
}

impl SimConfig {
    pub fn with_peers(peers: usize, seed: u64) -> Self {
        SimConfig { peers, seed, ..Self::default() }
    }

    pub fn width_params(&self) -> EffectiveWidthParams {
        EffectiveWidthParams { estimated_peers: self.estimated_peers.unwrap_or(self.peers), k_slack: self.k_slack }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latency_parsing() {
        assert_eq!("10000".parse::<Latency>().unwrap(), Latency::Fixed(10_000));
        assert_eq!("5..20".parse::<Latency>().unwrap(), Latency::Uniform { min: 5, max: 20 });
        assert!("20..5".parse::<Latency>().is_err());
        assert!("fast".parse::<Latency>().is_err());
        assert_eq!(Latency::Uniform { min: 5, max: 20 }.to_string(), "5..20");
    }

    #[test]
    fn width_defaults_to_peer_count() {
        assert_eq!(SimConfig::with_peers(64, 0).width_params().width(), 9);
    }
}
