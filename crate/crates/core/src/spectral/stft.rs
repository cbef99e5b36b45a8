use serde::{Deserialize, Serialize};

use crate::dsp::{fft_real, hann};
use crate::error::{Error, Result};
use crate::signal::UniformSeries;

/// Magnitude short-time Fourier transform, time-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    /// `frames[m][k] = |X(m, w_k)|`, one-sided, `k = 0..window_len / 2`.
    pub frames: Vec<Vec<f64>>,
    pub freqs: Vec<f64>,
    /// Start time of each frame in seconds.
    pub frame_times: Vec<f64>,
    pub window_len: usize,
    pub hop: usize,
}

impl Spectrogram {
    pub fn n_bins(&self) -> usize {
        self.freqs.len()
    }

    /// Frames truncated to their first `bins` frequency bins (all bins when
    /// fewer exist).
    pub fn truncated(&self, bins: usize) -> Vec<Vec<f64>> {
        self.frames.iter().map(|f| f[..bins.min(f.len())].to_vec()).collect()
    }
}

/// Hann-windowed one-sided magnitude spectrum of `frame`, unnormalized.
pub fn frame_magnitudes(frame: &[f64], window: &[f64]) -> Vec<f64> {
    let weighted: Vec<f64> = frame.iter().zip(window).map(|(x, w)| x * w).collect();
    let spec = fft_real(&weighted);
    spec[..frame.len() / 2 + 1].iter().map(|c| c.norm()).collect()
}

/// One-sided Hann STFT. Produces `floor((N - window_len) / hop) + 1` frames.
pub fn stft(s: &UniformSeries, window_len: usize, hop: usize) -> Result<Spectrogram> {
    if window_len < 2 || hop == 0 {
        return Err(Error::InvalidConfig(format!("stft window {window_len} / hop {hop}")));
    }
    if s.len() < window_len {
        return Err(Error::TooShort {
            needed: window_len,
            got: s.len(),
        });
    }
    let window = hann(window_len);
    let count = (s.len() - window_len) / hop + 1;
    let frames = (0..count)
        .map(|m| frame_magnitudes(&s.u[m * hop..m * hop + window_len], &window))
        .collect();
    let df = 1.0 / (window_len as f64 * s.dt);
    Ok(Spectrogram {
        frames,
        freqs: (0..=window_len / 2).map(|k| k as f64 * df).collect(),
        frame_times: (0..count).map(|m| s.t0 + (m * hop) as f64 * s.dt).collect(),
        window_len,
        hop,
    })
}

/// Energy of the full two-sided spectrum reconstructed from one side,
/// divided by the DFT length: equals the windowed frame's time-domain energy.
pub fn one_sided_energy(magnitudes: &[f64], window_len: usize) -> f64 {
    let k_max = magnitudes.len() - 1;
    let mut e = 0.0;
    for (k, m) in magnitudes.iter().enumerate() {
        let mirrored = k != 0 && !(window_len.is_multiple_of(2) && k == k_max);
        e += if mirrored { 2.0 } else { 1.0 } * m * m;
    }
    e / window_len as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(n: usize, fs: f64, f: f64) -> UniformSeries {
        let u = (0..n).map(|j| (2.0 * PI * f * j as f64 / fs).sin()).collect();
        UniformSeries::new(u, 1.0 / fs, 0.0).unwrap()
    }

    #[test]
    fn tone_peaks_in_its_bin() {
        // 64-sample frames at 1 kHz: 15.625 Hz bins, 125 Hz is bin 8.
        let s = tone(1000, 1000.0, 125.0);
        let sg = stft(&s, 64, 16).unwrap();
        assert_eq!(sg.frames.len(), (1000 - 64) / 16 + 1);
        assert_eq!(sg.n_bins(), 33);
        for f in &sg.frames {
            let k = f.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            assert_eq!(k, 8);
        }
    }

    #[test]
    fn impulse_confined_to_covering_frames() {
        let mut u = vec![0.0; 256];
        u[100] = 1.0;
        let s = UniformSeries::new(u, 1.0, 0.0).unwrap();
        let sg = stft(&s, 32, 8).unwrap();
        for (m, f) in sg.frames.iter().enumerate() {
            let start = m * 8;
            let covers = (start..start + 32).contains(&100);
            let energy: f64 = f.iter().map(|v| v * v).sum();
            if !covers {
                assert_eq!(energy, 0.0, "frame {m}");
            }
        }
        assert!(sg.frames[10].iter().any(|&v| v > 0.0));
    }

    #[test]
    fn parseval_per_frame() {
        let u: Vec<f64> = (0..500)
            .map(|j| ((j * j) as f64 * 0.01).sin() + 0.1 * j as f64 % 1.3)
            .collect();
        for len in [64usize, 63] {
            let s = UniformSeries::new(u.clone(), 0.01, 0.0).unwrap();
            let sg = stft(&s, len, 20).unwrap();
            let w = hann(len);
            for (m, f) in sg.frames.iter().enumerate() {
                let direct: f64 = u[m * 20..m * 20 + len]
                    .iter()
                    .zip(&w)
                    .map(|(x, w)| (x * w).powi(2))
                    .sum();
                let spectral = one_sided_energy(f, len);
                assert!((spectral - direct).abs() <= 1e-9 * direct.max(1.0));
            }
        }
    }

    #[test]
    fn too_short() {
        let s = tone(10, 100.0, 5.0);
        assert!(matches!(stft(&s, 16, 4), Err(Error::TooShort { .. })));
    }
}
