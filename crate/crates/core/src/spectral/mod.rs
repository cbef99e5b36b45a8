//! Spectral analysis: STFT, peak features, Morlet CWT and CEEMDAN, combined
//! into the six per-window features `z1..z6`.
//!
//! | feature | meaning |
//! |---|---|
//! | `z1` | dominant amplitude `A1` (amplitude-normalized, a unit sine reads 1) |
//! | `z2` | sideband asymmetry around the dominant bin, in `[0, 1]` |
//! | `z3` | offset in Hz from the dominant peak to the strongest bin outside its guard band |
//! | `z4` | magnitude near `2 f1` relative to `A1` |
//! | `z5` | global maximum of the CWT modulus |
//! | `z6` | CEEMDAN IMF energy over signal energy |

pub mod cwt;
pub mod emd;
pub mod peaks;
pub mod stft;

use serde::{Deserialize, Serialize};

use crate::dsp::{hann, mean};
use crate::error::{Error, Result};

pub use cwt::{cwt_max, cwt_modulus, default_scales};
pub use emd::{ceemdan, energy_ratio, CeemdanConfig, ImfSet};
pub use peaks::{dominant_amplitude, harmonic_ratio, second_peak_offset, sideband_symmetry};
pub use stft::{stft, Spectrogram};

/// Number of per-window spectral features.
pub const N_FEATURES: usize = 6;

pub const FEATURE_NAMES: [&str; N_FEATURES] = ["z1", "z2", "z3", "z4", "z5", "z6"];

/// Shortest window for which CEEMDAN is attempted.
pub const MIN_CEEMDAN_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Half-width of each sideband, in bins.
    pub sideband_bins: usize,
    /// Bins on each side of the dominant peak excluded from the second-peak
    /// search.
    pub guard_bins: usize,
    pub cwt_scales: usize,
    pub ceemdan: CeemdanConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            sideband_bins: 5,
            guard_bins: 1,
            cwt_scales: 32,
            ceemdan: CeemdanConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectralFeatures {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub z4: f64,
    pub z5: f64,
    pub z6: f64,
}

impl SpectralFeatures {
    pub fn to_array(&self) -> [f64; N_FEATURES] {
        [self.z1, self.z2, self.z3, self.z4, self.z5, self.z6]
    }
}

/// Why `z6` was not computed from a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Z6Status {
    Computed,
    /// Window shorter than [`MIN_CEEMDAN_LEN`]; `z6 = 0`.
    TooShort,
    /// Window carries no energy; `z6 = 0`.
    Silent,
    /// Some sift hit its iteration cap; the value is still reported.
    NotConverged,
}

/// Features of one window together with the `z6` status flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowFeatures {
    pub features: SpectralFeatures,
    pub z6_status: Z6Status,
}

/// Computes `z1..z6` for a single window sampled every `dt` seconds.
///
/// The window mean is removed first, and the whole window is treated as one
/// Hann-windowed STFT frame. `seed` drives the CEEMDAN noise ensemble.
pub fn window_features(window: &[f64], dt: f64, cfg: &FeatureConfig, seed: u64) -> Result<WindowFeatures> {
    let n = window.len();
    if n < 16 {
        return Err(Error::TooShort { needed: 16, got: n });
    }
    let mu = mean(window);
    let x: Vec<f64> = window.iter().map(|v| v - mu).collect();

    let w = hann(n);
    let coherent_gain: f64 = w.iter().sum();
    let frame: Vec<f64> = stft::frame_magnitudes(&x, &w)
        .into_iter()
        .map(|m| 2.0 * m / coherent_gain)
        .collect();
    let df = 1.0 / (n as f64 * dt);
    let freqs: Vec<f64> = (0..frame.len()).map(|k| k as f64 * df).collect();

    let (a1, k1) = dominant_amplitude(&frame);
    let z2 = sideband_symmetry(&frame, k1, cfg.sideband_bins);
    let z3 = if a1 > 0.0 {
        second_peak_offset(&frame, &freqs, k1, cfg.guard_bins)
    } else {
        0.0
    };
    let z4 = harmonic_ratio(&frame, &freqs, freqs[k1], a1);
    let z5 = cwt_max(&x, dt, &default_scales(n, dt, cfg.cwt_scales))?;

    let energy: f64 = x.iter().map(|v| v * v).sum();
    let (z6, z6_status) = if n < MIN_CEEMDAN_LEN {
        (0.0, Z6Status::TooShort)
    } else if !(energy > 0.0) {
        (0.0, Z6Status::Silent)
    } else {
        let set = ceemdan(&x, &cfg.ceemdan, seed)?;
        let status = if set.converged {
            Z6Status::Computed
        } else {
            Z6Status::NotConverged
        };
        (energy_ratio(&x, &set)?, status)
    };

    Ok(WindowFeatures {
        features: SpectralFeatures {
            z1: a1,
            z2,
            z3,
            z4,
            z5,
            z6,
        },
        z6_status,
    })
}
