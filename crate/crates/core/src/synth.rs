//! Seeded five-class cantilever-beam surrogate.
//!
//! Each trial drives three second-order resonators with one shared white
//! Gaussian excitation, sums the modes with class-dependent gains, adds a
//! static offset (the beam's sag under the added mass) and white measurement
//! noise. Class 0 is the unloaded beam; classes 1 to 4 place the mass at
//! successive positions, lowering every modal frequency by the configured
//! fraction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::{derive_seed, variance};
use crate::error::{Error, Result};
use crate::signal::TimeSeries;

pub const N_CLASSES: usize = 5;
pub const N_MODES: usize = 3;

pub const CLASS_NAMES: [&str; N_CLASSES] = ["no_mass", "mass_pos1", "mass_pos2", "mass_pos3", "mass_pos4"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeamConfig {
    pub fs: f64,
    pub duration: f64,
    /// Modal frequencies of the unloaded beam, Hz.
    pub modal_freqs: [f64; N_MODES],
    /// Relative frequency change per class, applied to every mode.
    pub class_freq_offsets: [f64; N_CLASSES],
    pub damping: [f64; N_MODES],
    /// Standard deviation of each mode in the unloaded beam.
    pub mode_gains: [f64; N_MODES],
    /// Per-class multiplier on each mode's gain.
    pub class_gain_scale: [[f64; N_MODES]; N_CLASSES],
    /// Mean displacement per class.
    pub class_offsets: [f64; N_CLASSES],
    /// Trial-to-trial standard deviation of the offset.
    pub offset_jitter: f64,
    /// Trial-to-trial relative standard deviation of the modal frequencies.
    pub freq_jitter: f64,
    pub noise_snr_db: f64,
    pub n_trials: usize,
    pub seed: u64,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self {
            fs: 4000.0,
            duration: 10.0,
            modal_freqs: [18.0, 47.0, 73.0],
            class_freq_offsets: [0.0, -0.01, -0.03, -0.07, -0.10],
            damping: [0.02, 0.015, 0.01],
            mode_gains: [0.15, 0.09, 0.07],
            class_gain_scale: [
                [1.0, 1.0, 1.0],
                [1.25, 1.1, 1.25],
                [1.55, 1.2, 1.5],
                [1.9, 1.3, 1.8],
                [2.3, 1.4, 2.15],
            ],
            class_offsets: [0.0, 0.1, 0.3, 0.55, 0.8],
            offset_jitter: 0.05,
            freq_jitter: 0.002,
            noise_snr_db: 20.0,
            n_trials: 40,
            seed: 42,
        }
    }
}

impl BeamConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.fs > 0.0) || !(self.duration > 0.0) {
            return bad("fs and duration must be positive");
        }
        if self.n_samples() < 16 {
            return bad("fewer than 16 samples per trial");
        }
        if self.n_trials < 2 {
            return bad("need at least two trials per class");
        }
        let f_max = self.modal_freqs.iter().cloned().fold(0.0, f64::max)
            * (1.0 + self.class_freq_offsets.iter().cloned().fold(0.0, f64::max));
        if !(self.fs > 2.0 * f_max) {
            return bad("fs must exceed twice the highest modal frequency");
        }
        if self.modal_freqs.iter().any(|f| !(*f > 0.0)) || self.class_freq_offsets.iter().any(|o| !(*o > -1.0)) {
            return bad("modal frequencies must stay positive");
        }
        if self.damping.iter().any(|z| !(*z > 0.0 && *z < 1.0)) {
            return bad("damping ratios must lie in (0, 1)");
        }
        if self
            .mode_gains
            .iter()
            .chain(self.class_gain_scale.iter().flatten())
            .any(|g| !(*g >= 0.0))
            || !(self.offset_jitter >= 0.0)
            || !(self.freq_jitter >= 0.0)
            || !self.noise_snr_db.is_finite()
        {
            return bad("gains, jitters and SNR must be finite and non-negative");
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.fs * self.duration).round() as usize
    }

    /// Modal frequencies of `class` before per-trial jitter.
    pub fn class_freqs(&self, class: usize) -> [f64; N_MODES] {
        self.modal_freqs.map(|f| f * (1.0 + self.class_freq_offsets[class]))
    }
}

/// Coefficients `(a1, a2)` of `x_n = a1 x_{n-1} + a2 x_{n-2} + e_n` for a
/// resonator at `f` Hz with damping ratio `zeta`.
fn resonator(f: f64, zeta: f64, fs: f64) -> (f64, f64) {
    let theta = 2.0 * std::f64::consts::PI * f / fs;
    let r = (-zeta * theta).exp();
    (2.0 * r * theta.cos(), -r * r)
}

/// Stationary variance of the AR(2) process above for unit innovations.
fn ar2_variance(a1: f64, a2: f64) -> f64 {
    (1.0 - a2) / ((1.0 + a2) * ((1.0 - a2).powi(2) - a1 * a1))
}

/// One trial of `class`, seeded independently of every other trial.
pub fn generate_trial(cfg: &BeamConfig, class: usize, trial: usize) -> Result<TimeSeries> {
    if class >= N_CLASSES {
        return Err(Error::InvalidConfig(format!("class {class} out of range")));
    }
    let stream = (class * cfg.n_trials.max(1) + trial) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, stream));
    let n = cfg.n_samples();
    let burn_in = (cfg.fs * 2.0) as usize;

    let freqs = cfg.class_freqs(class);
    let mut modes = Vec::with_capacity(N_MODES);
    for i in 0..N_MODES {
        let jitter: f64 = StandardNormal.sample(&mut rng);
        let f = freqs[i] * (1.0 + cfg.freq_jitter * jitter);
        let (a1, a2) = resonator(f, cfg.damping[i], cfg.fs);
        let gain = cfg.mode_gains[i] * cfg.class_gain_scale[class][i];
        modes.push((a1, a2, gain / ar2_variance(a1, a2).sqrt()));
    }

    let mut state = [(0.0f64, 0.0f64); N_MODES];
    let mut clean = Vec::with_capacity(n);
    for step in 0..burn_in + n {
        let e: f64 = StandardNormal.sample(&mut rng);
        let mut y = 0.0;
        for (s, &(a1, a2, g)) in state.iter_mut().zip(&modes) {
            let x = a1 * s.0 + a2 * s.1 + e;
            *s = (x, s.0);
            y += g * x;
        }
        if step >= burn_in {
            clean.push(y);
        }
    }

    let noise_sd = (variance(&clean) / 10f64.powf(cfg.noise_snr_db / 10.0)).sqrt();
    let offset_jitter: f64 = StandardNormal.sample(&mut rng);
    let offset = cfg.class_offsets[class] + cfg.offset_jitter * offset_jitter;
    let u: Vec<f64> = if noise_sd > 0.0 {
        let noise = Normal::new(0.0, noise_sd).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        clean.iter().map(|y| y + offset + noise.sample(&mut rng)).collect()
    } else {
        clean.iter().map(|y| y + offset).collect()
    };
    let t = (0..n).map(|j| j as f64 / cfg.fs).collect();
    TimeSeries::new(t, u, Some(class as u8), format!("{}_{:03}", CLASS_NAMES[class], trial))
}

/// All trials, class-major: `n_trials` records of class 0, then class 1, ...
pub fn generate(cfg: &BeamConfig) -> Result<Vec<TimeSeries>> {
    cfg.validate()?;
    (0..N_CLASSES * cfg.n_trials)
        .into_par_iter()
        .map(|i| generate_trial(cfg, i / cfg.n_trials, i % cfg.n_trials))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::resample;
    use crate::tau::estimate_psd;

    fn small() -> BeamConfig {
        BeamConfig {
            duration: 4.0,
            n_trials: 3,
            ..Default::default()
        }
    }

    #[test]
    fn balanced_and_deterministic() {
        let cfg = small();
        let a = generate(&cfg).unwrap();
        assert_eq!(a.len(), 15);
        for c in 0..5u8 {
            assert_eq!(a.iter().filter(|s| s.label == Some(c)).count(), 3);
        }
        assert_eq!(a, generate(&cfg).unwrap());
        let other = generate(&BeamConfig { seed: 7, ..cfg }).unwrap();
        assert_ne!(a[0].u(), other[0].u());
    }

    #[test]
    fn ar2_variance_matches_simulation() {
        let (a1, a2) = resonator(47.0, 0.015, 4000.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut x1, mut x2) = (0.0, 0.0);
        let mut xs = Vec::new();
        for i in 0..400_000 {
            let e: f64 = StandardNormal.sample(&mut rng);
            let x = a1 * x1 + a2 * x2 + e;
            x2 = x1;
            x1 = x;
            if i >= 20_000 {
                xs.push(x);
            }
        }
        let ratio = variance(&xs) / ar2_variance(a1, a2);
        assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn psd_peaks_at_modal_freqs() {
        let cfg = BeamConfig {
            duration: 20.0,
            ..Default::default()
        };
        let s = generate_trial(&cfg, 0, 0).unwrap();
        let u = resample(&s, 1.0 / cfg.fs).unwrap();
        let p = estimate_psd(&u, 4000).unwrap();
        // Oracle: local maxima of the PSD that dominate their +-5 Hz
        // neighbourhood; the three strongest must sit on the modes.
        let mut peaks: Vec<(f64, f64)> = (5..p.power.len() - 5)
            .filter(|&k| (k - 5..=k + 5).all(|j| p.power[j] <= p.power[k]))
            .map(|k| (p.power[k], p.freqs[k]))
            .collect();
        peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut found: Vec<f64> = peaks.iter().take(3).map(|p| p.1).collect();
        found.sort_by(f64::total_cmp);
        for (f, target) in found.iter().zip(cfg.modal_freqs) {
            assert!((f - target).abs() <= 2.0, "{f} vs {target}");
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(generate(&BeamConfig { fs: 100.0, ..small() }).is_err());
        assert!(generate(&BeamConfig { n_trials: 1, ..small() }).is_err());
        assert!(generate(&BeamConfig {
            damping: [0.0, 0.1, 0.1],
            ..small()
        })
        .is_err());
    }
}
