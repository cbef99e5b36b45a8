//! The single pipeline configuration and its content hash.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classify::ClassifyConfig;
use crate::descriptors::DescriptorParams;
use crate::error::{Error, Result};
use crate::fusion::{BaseConfig, WindowConfig};
use crate::spectral::FeatureConfig;
use crate::synth::BeamConfig;
use crate::tau::TauConfig;

/// Every tunable of every stage. Missing keys in a config file take the
/// defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    /// Root seed for cross-validation splits and CEEMDAN noise. The
    /// generator has its own seed in `synth.seed`.
    pub seed: u64,
    pub synth: BeamConfig,
    pub descriptors: DescriptorParams,
    /// Monte Carlo draws per class pair for the overlap estimate.
    pub n_mc: usize,
    pub tau: TauConfig,
    pub window: WindowConfig,
    pub base: BaseConfig,
    pub features: FeatureConfig,
    pub classify: ClassifyConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 42,
            synth: BeamConfig::default(),
            descriptors: DescriptorParams::default(),
            n_mc: 100_000,
            tau: TauConfig::default(),
            window: WindowConfig::default(),
            base: BaseConfig::default(),
            features: FeatureConfig::default(),
            classify: ClassifyConfig::default(),
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        hex::encode(&digest[..8])
    }

    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_mc == 0 {
            return bad("n_mc must be positive".into());
        }
        if !(0.0..0.5).contains(&self.window.alpha) {
            return bad(format!("alpha {} outside [0, 0.5)", self.window.alpha));
        }
        if !(self.window.win_dur_ratio > 0.0 && self.window.win_dur_ratio <= 1.0) {
            return bad(format!("win_dur_ratio {} outside (0, 1]", self.window.win_dur_ratio));
        }
        if self.classify.n_splits < 2 {
            return bad("n_splits must be at least 2".into());
        }
        if self.classify.knn_k == 0 {
            return bad("knn_k must be positive".into());
        }
        if self.tau.n_candidates < 2 {
            return bad("tau sweep needs at least two candidates".into());
        }
        Ok(())
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            config_hash: self.hash(),
            seed: self.seed,
        }
    }
}

/// Identifies the configuration an artifact was produced from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    /// The comment line written at the top of CSV artifacts, without `#`.
    pub fn comment(&self) -> String {
        format!("config_hash={} seed={}", self.config_hash, self.seed)
    }
}
