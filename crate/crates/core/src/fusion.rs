//! The three input representations fed to the classifiers.
//!
//! * **Base**: raw fixed-length sequences cut from each record at the native
//!   rate, one `1 x timesteps` sample per kept sequence.
//! * **STA**: each record resampled at `tau`, trimmed and windowed; one
//!   `M x L` sample per record.
//! * **HSTF**: the STA windows with their six spectral features appended;
//!   one `M x (L + 6)` sample per record.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::derive_seed;
use crate::error::{Error, Result};
use crate::signal::{resample, trim, window_len_for, windowize, TimeSeries, UniformSeries};
use crate::spectral::{window_features, FeatureConfig, Z6Status, N_FEATURES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Base,
    Sta,
    Hstf,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Base => "Base",
            Kind::Sta => "STA",
            Kind::Hstf => "HSTF",
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "base" => Ok(Kind::Base),
            "sta" => Ok(Kind::Sta),
            "hstf" => Ok(Kind::Hstf),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

/// One labeled `rows x cols` matrix, stored row-major as nested vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub rows: Vec<Vec<f64>>,
    pub label: u8,
    pub source_id: String,
}

impl Sample {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    /// Column means over the rows.
    pub fn mean_pooled(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols()];
        for r in &self.rows {
            out.iter_mut().zip(r).for_each(|(o, v)| *o += v);
        }
        let m = self.rows.len().max(1) as f64;
        out.iter_mut().for_each(|o| *o /= m);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representation {
    pub kind: Kind,
    /// Resampling interval; `None` for Base.
    pub tau: Option<f64>,
    /// Raw columns per row (`timesteps` for Base, `L` otherwise).
    pub window_len: usize,
    pub samples: Vec<Sample>,
    /// Windows whose `z6` fell back to 0.
    pub z6_fallbacks: usize,
    pub warnings: Vec<String>,
}

impl Representation {
    /// `(M, D)` shared by every sample.
    pub fn shape(&self) -> (usize, usize) {
        self.samples.first().map_or((0, 0), |s| (s.n_rows(), s.n_cols()))
    }

    pub fn labels(&self) -> Vec<u8> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// Short label such as `HSTF(0.008)`.
    pub fn method_label(&self) -> String {
        match self.tau {
            Some(t) => format!("{}({})", self.kind.name(), format_tau(t)),
            None => self.kind.name().to_string(),
        }
    }
}

/// `tau` rounded to the millisecond grid when it sits on it, else to 4
/// significant digits.
pub fn format_tau(t: f64) -> String {
    let ms = (t * 1000.0).round();
    if (t * 1000.0 - ms).abs() < 1e-9 {
        format!("{}", ms / 1000.0)
    } else {
        format!("{:.4}", t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaseConfig {
    pub timesteps: usize,
    pub start_row: usize,
    pub sampling_ratio: f64,
}

impl Default for BaseConfig {
    fn default() -> Self {
        Self {
            timesteps: 24,
            start_row: 4000,
            sampling_ratio: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowConfig {
    pub alpha: f64,
    pub win_dur_ratio: f64,
    /// Window hop as a fraction of `L` for STA (1 = no overlap).
    pub sta_hop_fraction: f64,
    /// Window hop as a fraction of `L` for HSTF.
    pub hstf_hop_fraction: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            alpha: 0.02,
            win_dur_ratio: 0.04,
            sta_hop_fraction: 1.0,
            hstf_hop_fraction: 1.0,
        }
    }
}

fn hop_for(len: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!("hop fraction {fraction} outside (0, 1]")));
    }
    Ok(((len as f64 * fraction).round() as usize).max(1))
}

fn require_labels(signals: &[TimeSeries]) -> Result<()> {
    if signals.is_empty() {
        return Err(Error::InvalidConfig("no signals".into()));
    }
    match signals.iter().find(|s| s.label.is_none()) {
        Some(s) => Err(Error::InvalidConfig(format!("record {} has no label", s.source_id))),
        None => Ok(()),
    }
}

/// Raw sequences of `timesteps` consecutive samples starting at
/// `start_row`, keeping `floor(n_seq * sampling_ratio)` of them spread evenly.
pub fn build_base(signals: &[TimeSeries], cfg: &BaseConfig) -> Result<Representation> {
    require_labels(signals)?;
    if cfg.timesteps == 0 || !(cfg.sampling_ratio > 0.0 && cfg.sampling_ratio <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "timesteps {} / sampling ratio {}",
            cfg.timesteps, cfg.sampling_ratio
        )));
    }
    let mut samples = Vec::new();
    for s in signals {
        let u = s.u();
        if u.len() < cfg.start_row + cfg.timesteps {
            return Err(Error::TooShort {
                needed: cfg.start_row + cfg.timesteps,
                got: u.len(),
            });
        }
        let n_seq = (u.len() - cfg.start_row) / cfg.timesteps;
        let n_keep = ((n_seq as f64 * cfg.sampling_ratio) + 1e-9).floor() as usize;
        for i in 0..n_keep {
            let q = i * n_seq / n_keep;
            let start = cfg.start_row + q * cfg.timesteps;
            samples.push(Sample {
                rows: vec![u[start..start + cfg.timesteps].to_vec()],
                label: s.label.unwrap_or_default(),
                source_id: s.source_id.clone(),
            });
        }
    }
    Ok(Representation {
        kind: Kind::Base,
        tau: None,
        window_len: cfg.timesteps,
        samples,
        z6_fallbacks: 0,
        warnings: Vec::new(),
    })
}

/// Resampled and trimmed records together with the shared window length.
fn aligned(signals: &[TimeSeries], tau: f64, cfg: &WindowConfig) -> Result<(Vec<UniformSeries>, usize)> {
    require_labels(signals)?;
    let resampled = signals
        .par_iter()
        .map(|s| resample(s, tau))
        .collect::<Result<Vec<_>>>()?;
    let shortest = resampled.iter().map(|u| u.len()).min().unwrap_or(0);
    let len = window_len_for(shortest, cfg.win_dur_ratio);
    let trimmed = resampled
        .iter()
        .map(|u| trim(u, cfg.alpha))
        .collect::<Result<Vec<_>>>()?;
    Ok((trimmed, len))
}

fn floor_warning(tau: f64, floor: Option<f64>) -> Vec<String> {
    match floor {
        Some(f) if tau < f => vec![format!(
            "tau {tau} s is below the Nyquist floor {f} s of the slowest-sampled class"
        )],
        _ => Vec::new(),
    }
}

/// Windows per record, cut to the smallest count so all samples share `M`.
fn windowed(series: &[UniformSeries], len: usize, hop: usize) -> Result<Vec<Vec<Vec<f64>>>> {
    let mut sets = series
        .iter()
        .map(|s| windowize(s, len, hop).map(|w| w.windows))
        .collect::<Result<Vec<_>>>()?;
    let m = sets.iter().map(|w| w.len()).min().unwrap_or(0);
    sets.iter_mut().for_each(|w| w.truncate(m));
    Ok(sets)
}

/// STA: resample at `tau`, trim `alpha` from each end and cut windows of
/// `L = max(8, round(win_dur_ratio * N))`, `N` the shortest resampled length.
/// `nyquist_floor` only produces a warning when `tau` lies below it.
pub fn build_sta(
    signals: &[TimeSeries],
    tau: f64,
    cfg: &WindowConfig,
    nyquist_floor: Option<f64>,
) -> Result<Representation> {
    let (series, len) = aligned(signals, tau, cfg)?;
    let hop = hop_for(len, cfg.sta_hop_fraction)?;
    let sets = windowed(&series, len, hop)?;
    let samples = sets
        .into_iter()
        .zip(&series)
        .map(|(rows, s)| Sample {
            rows,
            label: s.label.unwrap_or_default(),
            source_id: s.source_id.clone(),
        })
        .collect();
    Ok(Representation {
        kind: Kind::Sta,
        tau: Some(tau),
        window_len: len,
        samples,
        z6_fallbacks: 0,
        warnings: floor_warning(tau, nyquist_floor),
    })
}

/// HSTF: STA windows with `[z1..z6]` appended to every row. The CEEMDAN
/// seed of window `m` of record `i` is derived from `seed`, `i` and `m`.
pub fn build_hstf(
    signals: &[TimeSeries],
    tau: f64,
    cfg: &WindowConfig,
    features: &FeatureConfig,
    seed: u64,
    nyquist_floor: Option<f64>,
) -> Result<Representation> {
    let (series, len) = aligned(signals, tau, cfg)?;
    let hop = hop_for(len, cfg.hstf_hop_fraction)?;
    let sets = windowed(&series, len, hop)?;
    let built = sets
        .into_par_iter()
        .enumerate()
        .map(|(i, windows)| {
            let mut fallbacks = 0;
            let rows = windows
                .into_iter()
                .enumerate()
                .map(|(m, mut w)| {
                    let stream = ((i as u64) << 32) | m as u64;
                    let f = window_features(&w, tau, features, derive_seed(seed, stream))?;
                    if matches!(f.z6_status, Z6Status::TooShort | Z6Status::Silent) {
                        fallbacks += 1;
                    }
                    w.extend_from_slice(&f.features.to_array());
                    Ok(w)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((rows, fallbacks))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut z6_fallbacks = 0;
    let samples = built
        .into_iter()
        .zip(&series)
        .map(|((rows, fb), s)| {
            z6_fallbacks += fb;
            Sample {
                rows,
                label: s.label.unwrap_or_default(),
                source_id: s.source_id.clone(),
            }
        })
        .collect();
    Ok(Representation {
        kind: Kind::Hstf,
        tau: Some(tau),
        window_len: len,
        samples,
        z6_fallbacks,
        warnings: floor_warning(tau, nyquist_floor),
    })
}

/// Column-wise standardization of a block of columns, fitted on a subset of
/// samples and applied to any sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScaler {
    pub first_col: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ZScaler {
    /// Fits the `N_FEATURES` trailing columns starting at `first_col` over
    /// every row of the samples selected by `idx`. Zero-variance columns get
    /// unit scale.
    pub fn fit(samples: &[Sample], idx: &[usize], first_col: usize) -> Result<Self> {
        if idx.is_empty() {
            return Err(Error::EmptyTrain);
        }
        let mut sum = [0.0; N_FEATURES];
        let mut count = 0usize;
        for &i in idx {
            for r in &samples[i].rows {
                sum.iter_mut().zip(&r[first_col..]).for_each(|(s, v)| *s += v);
                count += 1;
            }
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
        let mut sq = [0.0; N_FEATURES];
        for &i in idx {
            for r in &samples[i].rows {
                for (k, v) in r[first_col..].iter().enumerate() {
                    sq[k] += (v - mean[k]).powi(2);
                }
            }
        }
        let std = sq
            .iter()
            .map(|s| {
                let sd = (s / count as f64).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { first_col, mean, std })
    }

    pub fn apply(&self, sample: &Sample) -> Sample {
        let rows = sample
            .rows
            .iter()
            .map(|r| {
                let mut out = r.clone();
                for k in 0..self.mean.len() {
                    let c = self.first_col + k;
                    out[c] = (out[c] - self.mean[k]) / self.std[k];
                }
                out
            })
            .collect();
        Sample {
            rows,
            label: sample.label,
            source_id: sample.source_id.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, BeamConfig};

    fn record(n: usize, fs: f64, label: u8, f: impl Fn(usize) -> f64) -> TimeSeries {
        TimeSeries::new(
            (0..n).map(|j| j as f64 / fs).collect(),
            (0..n).map(f).collect(),
            Some(label),
            format!("r{label}"),
        )
        .unwrap()
    }

    #[test]
    fn base_counts() {
        let s = record(40_000, 4000.0, 0, |j| j as f64);
        let rep = build_base(std::slice::from_ref(&s), &BaseConfig::default()).unwrap();
        // Oracle: floor((40000 - 4000) / 24) = 1500 sequences, 30% kept.
        assert_eq!(rep.samples.len(), (1500.0f64 * 0.3).floor() as usize);
        assert_eq!(rep.shape(), (1, 24));
        assert_eq!(rep.samples[0].rows[0][0], 4000.0);

        let all = build_base(
            std::slice::from_ref(&s),
            &BaseConfig {
                sampling_ratio: 1.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(all.samples.len(), 1500);
        let starts: Vec<f64> = all.samples.iter().map(|x| x.rows[0][0]).collect();
        assert!(starts.windows(2).all(|w| w[1] - w[0] == 24.0));

        let bad = BaseConfig {
            start_row: 40_000,
            ..Default::default()
        };
        assert!(matches!(build_base(&[s], &bad), Err(Error::TooShort { .. })));
    }

    fn small_data() -> Vec<TimeSeries> {
        generate(&BeamConfig {
            duration: 4.0,
            n_trials: 2,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn sta_shapes_and_monotone_count() {
        let data = small_data();
        let cfg = WindowConfig::default();
        let coarse = build_sta(&data, 0.02, &cfg, None).unwrap();
        let fine = build_sta(&data, 0.008, &cfg, None).unwrap();
        let (m, d) = coarse.shape();
        assert!(m >= 1 && d == coarse.window_len);
        assert!(coarse
            .samples
            .iter()
            .all(|s| s.n_rows() == m && s.rows.iter().all(|r| r.len() == d)));
        // Each record gives M windows; resampling at 0.008 s yields more samples per record.
        let per_record = |r: &Representation| r.shape().0 * r.shape().1;
        assert!(per_record(&fine) > per_record(&coarse));
        assert_eq!(coarse.samples.len(), data.len());
    }

    #[test]
    fn sta_deterministic_and_warns_below_floor() {
        let data = small_data();
        let twin = vec![data[0].clone(), data[0].clone()];
        let rep = build_sta(&twin, 0.01, &WindowConfig::default(), Some(0.007)).unwrap();
        assert_eq!(rep.samples[0].rows, rep.samples[1].rows);
        assert!(rep.warnings.is_empty());
        let low = build_sta(&twin, 0.005, &WindowConfig::default(), Some(0.007)).unwrap();
        assert_eq!(low.warnings.len(), 1);
    }

    #[test]
    fn hstf_prefix_equals_sta() {
        let data = small_data();
        let cfg = WindowConfig::default();
        let sta = build_sta(&data, 0.008, &cfg, None).unwrap();
        let hstf = build_hstf(&data, 0.008, &cfg, &FeatureConfig::default(), 3, None).unwrap();
        let l = sta.window_len;
        assert_eq!(hstf.shape(), (sta.shape().0, l + 6));
        for (a, b) in sta.samples.iter().zip(&hstf.samples) {
            for (ra, rb) in a.rows.iter().zip(&b.rows) {
                assert_eq!(ra.as_slice(), &rb[..l]);
                assert!(rb.iter().all(|v| v.is_finite()));
            }
        }
        assert_eq!(hstf.method_label(), "HSTF(0.008)");
    }

    #[test]
    fn hstf_zero_signal() {
        let z = record(2000, 500.0, 0, |_| 0.0);
        let z2 = TimeSeries::new(z.t().to_vec(), z.u().to_vec(), Some(1), "z2").unwrap();
        let rep = build_hstf(
            &[z, z2],
            0.004,
            &WindowConfig::default(),
            &FeatureConfig::default(),
            0,
            None,
        )
        .unwrap();
        for s in &rep.samples {
            for r in &s.rows {
                assert!(r.iter().all(|&v| v == 0.0));
            }
        }
        assert_eq!(rep.z6_fallbacks, rep.samples.len() * rep.shape().0);
    }

    #[test]
    fn zscaler_fits_train_only() {
        let mk = |v: f64, label| Sample {
            rows: vec![vec![9.0, v, v, v, v, v, v]],
            label,
            source_id: String::new(),
        };
        let samples = vec![mk(1.0, 0), mk(3.0, 1), mk(100.0, 0)];
        let sc = ZScaler::fit(&samples, &[0, 1], 1).unwrap();
        assert_eq!(sc.mean, vec![2.0; 6]);
        assert_eq!(sc.std, vec![1.0; 6]);
        let out = sc.apply(&samples[2]);
        assert_eq!(out.rows[0][0], 9.0);
        assert_eq!(out.rows[0][1], 98.0);
    }
}
