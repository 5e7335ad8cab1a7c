//! Simulation configuration. Every timing number lives here (and in the
//! shipped TOML files), never as a hidden constant.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// DRAM access latency model. A transfer of n words costs
/// `latency_first_word + (ceil(n / burst_words) * burst_words - 1) * per_burst_word`
/// cycles (partial bursts are padded to whole bursts), and 0 for n == 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DramConfig {
    pub latency_first_word: u64,
    pub per_burst_word: u64,
    pub burst_words: u64,
    /// Backing store capacity in 32-bit words.
    pub size_words: u32,
}

impl Default for DramConfig {
    fn default() -> Self {
        DramConfig {
            latency_first_word: 30,
            per_burst_word: 1,
            burst_words: 16,
            size_words: 4 << 20,
        }
    }
}

impl DramConfig {
    /// Deterministic cost of fetching or storing `n_words`.
    pub fn fetch_cost(&self, n_words: u64) -> u64 {
        if n_words == 0 {
            return 0;
        }
        let bursts = n_words.div_ceil(self.burst_words.max(1));
        self.latency_first_word + (bursts * self.burst_words.max(1) - 1) * self.per_burst_word
    }
}

/// Core timing knobs. The two-stage pipeline refills for one extra cycle on
/// taken branches and jumps; that bubble is an assumption, so it stays
/// configurable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoreConfig {
    pub taken_branch_extra: u64,
    /// When true, a cim.conv followed by an independent non-control base
    /// instruction retires as a pair in one cycle (the conv uses the wide
    /// FM port and the macro; the base op uses the ALU and the 32-bit port).
    pub cim_pairing: bool,
}

impl Default for CoreConfig {
    fn default() -> Self {
        CoreConfig { taken_branch_extra: 1, cim_pairing: false }
    }
}

/// Fixed SRAM geometry; asserted, not tunable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SramConfig {
    pub fm_kbits: u32,
    pub weight_kbits: u32,
}

impl Default for SramConfig {
    fn default() -> Self {
        SramConfig { fm_kbits: 256, weight_kbits: 512 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub clock_mhz: u32,
    pub dram: DramConfig,
    pub core: CoreConfig,
    pub sram: SramConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            clock_mhz: 50,
            dram: DramConfig::default(),
            core: CoreConfig::default(),
            sram: SramConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io error reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error in {path}: {source}")]
    Parse { path: String, source: toml::de::Error },
    #[error("sram sizes are fixed at fm=256 kbit, weight=512 kbit; got fm={fm} weight={weight}")]
    SramSize { fm: u32, weight: u32 },
}

impl SimConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: SimConfig = toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sram.fm_kbits != 256 || self.sram.weight_kbits != 512 {
            return Err(ConfigError::SramSize {
                fm: self.sram.fm_kbits,
                weight: self.sram.weight_kbits,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_fetch_cost_matches_hand_example() {
        // 16 words, (first=30, per=1, burst=16): 30 + 15 = 45.
        let d = DramConfig::default();
        assert_eq!(d.fetch_cost(16), 45);
        assert_eq!(d.fetch_cost(0), 0);
        // One word still pads to a whole burst.
        assert_eq!(d.fetch_cost(1), 45);
        assert_eq!(d.fetch_cost(17), 30 + 31);
    }

    #[test]
    fn fetch_cost_is_monotone() {
        let d = DramConfig::default();
        let mut prev = 0;
        for n in 0..=1024 {
            let c = d.fetch_cost(n);
            assert!(c >= prev, "cost({n}) = {c} < cost({}) = {prev}", n - 1);
            prev = c;
        }
    }

    #[test]
    fn toml_roundtrip() {
        let cfg = SimConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: SimConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
