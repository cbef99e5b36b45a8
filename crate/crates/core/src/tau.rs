//! Data-driven choice of the resampling interval `dt`.
//!
//! For each class the critical frequency `f*` (95% of PSD energy) gives a
//! Nyquist reference `dt_nyq = 1 / (2 f*)`. Candidate intervals inside
//! `[beta, gamma] * dt_nyq` are scored by
//!
//! ```text
//! S = sigmoid(mean_F - lambda_r * R - lambda_m * M / T)
//! ```
//!
//! where `mean_F` is the class-versus-rest ANOVA F-score averaged over the
//! grid points, `R` the decay-weighted correlation between grid points and
//! `M / T` the grid density. The best interval maximizes `S`; the knee is the
//! onset of diminishing returns on the curve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::{fft_real, hann, logspace, mean};
use crate::error::{Error, Result};
use crate::signal::{resample, TimeSeries, UniformSeries};

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub total_power: f64,
}

impl PsdEstimate {
    pub fn df(&self) -> f64 {
        if self.freqs.len() > 1 {
            self.freqs[1] - self.freqs[0]
        } else {
            0.0
        }
    }

    /// `sum power * df`, which estimates the signal variance.
    pub fn integral(&self) -> f64 {
        self.total_power * self.df()
    }

    /// Bin-wise mean of estimates sharing one frequency axis.
    pub fn average(estimates: &[PsdEstimate]) -> Result<PsdEstimate> {
        let first = estimates
            .first()
            .ok_or(Error::InvalidConfig("no PSD estimates to average".into()))?;
        let mut power = vec![0.0; first.power.len()];
        for e in estimates {
            if e.freqs != first.freqs {
                return Err(Error::LengthMismatch {
                    left: first.freqs.len(),
                    right: e.freqs.len(),
                });
            }
            power.iter_mut().zip(&e.power).for_each(|(p, v)| *p += v);
        }
        let k = estimates.len() as f64;
        power.iter_mut().for_each(|p| *p /= k);
        Ok(PsdEstimate {
            freqs: first.freqs.clone(),
            total_power: power.iter().sum(),
            power,
        })
    }
}

/// Welch PSD: Hann segments of `nperseg` samples with 50% overlap, each
/// demeaned, density-scaled so that white noise of variance `s^2` reads
/// `2 s^2 / fs` per one-sided bin.
pub fn estimate_psd(s: &UniformSeries, nperseg: usize) -> Result<PsdEstimate> {
    if nperseg < 16 {
        return Err(Error::InvalidConfig(format!("nperseg {nperseg} below 16")));
    }
    if s.len() < nperseg {
        return Err(Error::TooShort {
            needed: nperseg,
            got: s.len(),
        });
    }
    let w = hann(nperseg);
    let fs = s.fs();
    let scale = 1.0 / (fs * w.iter().map(|v| v * v).sum::<f64>());
    let hop = nperseg / 2;
    let n_seg = (s.len() - nperseg) / hop + 1;
    let n_bins = nperseg / 2 + 1;
    let mut power = vec![0.0; n_bins];
    for m in 0..n_seg {
        let seg = &s.u[m * hop..m * hop + nperseg];
        let mu = mean(seg);
        let x: Vec<f64> = seg.iter().zip(&w).map(|(v, wi)| (v - mu) * wi).collect();
        let spec = fft_real(&x);
        for (k, p) in power.iter_mut().enumerate() {
            *p += spec[k].norm_sqr();
        }
    }
    for (k, p) in power.iter_mut().enumerate() {
        let one_sided = if k == 0 || (nperseg.is_multiple_of(2) && k == n_bins - 1) {
            1.0
        } else {
            2.0
        };
        *p *= one_sided * scale / n_seg as f64;
    }
    let df = fs / nperseg as f64;
    Ok(PsdEstimate {
        freqs: (0..n_bins).map(|k| k as f64 * df).collect(),
        total_power: power.iter().sum(),
        power,
    })
}

/// Smallest frequency at which the cumulative power reaches
/// `fraction * total`, interpolated linearly inside the crossing bin.
pub fn critical_frequency(p: &PsdEstimate, fraction: f64) -> Result<f64> {
    if !(p.total_power > 0.0) {
        return Err(Error::SilentSignal);
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!("energy fraction {fraction}")));
    }
    let target = fraction * p.total_power;
    let mut cum = 0.0;
    for (k, &pk) in p.power.iter().enumerate() {
        let next = cum + pk;
        if next >= target && pk > 0.0 {
            if k == 0 {
                return Ok(p.freqs[0]);
            }
            let frac = ((target - cum) / pk).clamp(0.0, 1.0);
            return Ok(p.freqs[k - 1] + frac * (p.freqs[k] - p.freqs[k - 1]));
        }
        cum = next;
    }
    Ok(*p.freqs.last().unwrap_or(&0.0))
}

/// Nyquist reference interval and the search band around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NyquistBand {
    pub nyquist_dt: f64,
    pub lo: f64,
    pub hi: f64,
}

pub fn nyquist_band(f_star: f64, beta: f64, gamma: f64) -> Result<NyquistBand> {
    if !(f_star > 0.0) || !f_star.is_finite() {
        return Err(Error::InvalidConfig(format!("critical frequency {f_star}")));
    }
    if !(beta > 0.0 && beta <= gamma) {
        return Err(Error::InvalidConfig(format!("band [{beta}, {gamma}]")));
    }
    let nyquist_dt = 1.0 / (2.0 * f_star);
    Ok(NyquistBand {
        nyquist_dt,
        lo: beta * nyquist_dt,
        hi: gamma * nyquist_dt,
    })
}

/// ANOVA ratio `sum_c N_c (mu_c - mu)^2 / (sum_c sum_i (x - mu_c)^2 + eps)`
/// without degree-of-freedom normalization, capped at `1 / eps`.
pub fn anova_f_score(groups: &[&[f64]], eps: f64) -> Result<f64> {
    if groups.len() < 2 {
        return Err(Error::DegenerateClasses("F-score needs at least two classes"));
    }
    if groups.iter().any(|g| g.len() < 2) {
        return Err(Error::DegenerateClasses("F-score needs two samples per class"));
    }
    let n: usize = groups.iter().map(|g| g.len()).sum();
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let mu = mean(g);
        ssb += g.len() as f64 * (mu - grand).powi(2);
        ssw += g.iter().map(|v| (v - mu).powi(2)).sum::<f64>();
    }
    Ok((ssb / (ssw + eps)).min(1.0 / eps))
}

/// Weights below this are treated as zero when summing redundancy pairs.
const PAIR_WEIGHT_CUTOFF: f64 = 1e-12;

/// Correlation redundancy over grid points.
///
/// `columns[j]` holds the values of every sample at grid time `taus[j]`;
/// `R = 2 / (M (M - 1)) sum_{i<j} |r_ij| exp(-|tau_i - tau_j| / ell)`.
/// A grid point with zero variance correlates as 0 with every other point.
/// Pairs whose decay weight falls below 1e-12 are skipped, which requires
/// `taus` to be ascending.
pub fn redundancy_penalty(columns: &[Vec<f64>], taus: &[f64], ell: f64) -> Result<f64> {
    let m = columns.len();
    if m < 2 {
        return Err(Error::TooShort { needed: 2, got: m });
    }
    if taus.len() != m {
        return Err(Error::LengthMismatch {
            left: m,
            right: taus.len(),
        });
    }
    if !(ell > 0.0) {
        return Err(Error::InvalidConfig(format!("decay length {ell}")));
    }
    let z: Vec<Option<Vec<f64>>> = columns.iter().map(|c| standardized(c)).collect();
    let n = columns[0].len() as f64;
    let max_gap = -PAIR_WEIGHT_CUTOFF.ln() * ell;
    let mut total = 0.0;
    for i in 0..m {
        let Some(zi) = &z[i] else { continue };
        for j in i + 1..m {
            let gap = (taus[j] - taus[i]).abs();
            if gap > max_gap {
                break;
            }
            let Some(zj) = &z[j] else { continue };
            let r = zi.iter().zip(zj).map(|(a, b)| a * b).sum::<f64>() / n;
            total += r.abs().min(1.0) * (-gap / ell).exp();
        }
    }
    Ok(2.0 * total / (m * (m - 1)) as f64)
}

fn standardized(c: &[f64]) -> Option<Vec<f64>> {
    let mu = mean(c);
    let var = c.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / c.len() as f64;
    if !(var > 0.0) || var.sqrt() <= 1e-12 * mu.abs() {
        return None;
    }
    let sd = var.sqrt();
    Some(c.iter().map(|v| (v - mu) / sd).collect())
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `sigmoid(mean_f - lambda_r * r - lambda_m * m / t)`.
pub fn combined_score(mean_f: f64, r: f64, m: usize, t: f64, lambda_r: f64, lambda_m: f64) -> f64 {
    sigmoid(mean_f - lambda_r * r - lambda_m * m as f64 / t)
}

/// Index of the knee: the point farthest from the chord joining the first and
/// last points, both axes rescaled to `[0, 1]`. A flat curve gives 0.
pub fn knee_index(x: &[f64], y: &[f64]) -> usize {
    let n = x.len().min(y.len());
    if n < 3 {
        return 0;
    }
    let (x0, x1) = (x[0], x[n - 1]);
    let (lo, hi) = y[..n]
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(x1 > x0) || !(hi > lo) {
        return 0;
    }
    let nx = |v: f64| (v - x0) / (x1 - x0);
    let ny = |v: f64| (v - lo) / (hi - lo);
    let (ya, yb) = (ny(y[0]), ny(y[n - 1]));
    let slope = yb - ya;
    let norm = (1.0 + slope * slope).sqrt();
    let mut best = (0.0, 0);
    for i in 1..n - 1 {
        let d = (slope * nx(x[i]) - ny(y[i]) + ya).abs() / norm;
        if d > best.0 {
            best = (d, i);
        }
    }
    best.1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TauConfig {
    pub energy_fraction: f64,
    pub beta: f64,
    pub gamma: f64,
    pub n_candidates: usize,
    pub lambda_r: f64,
    /// `lambda_m = lambda_m_scale * T / M_ref`, with `M_ref` the grid size
    /// at the Nyquist interval.
    pub lambda_m_scale: f64,
    pub epsilon: f64,
    /// Welch segment length, capped at the shortest signal.
    pub nperseg: usize,
}

impl Default for TauConfig {
    fn default() -> Self {
        Self {
            energy_fraction: 0.95,
            beta: 0.5,
            gamma: 3.0,
            n_candidates: 32,
            lambda_r: 0.5,
            lambda_m_scale: 0.01,
            epsilon: 1e-12,
            nperseg: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauCandidate {
    pub tau: f64,
    pub s: f64,
    pub mean_f: f64,
    pub r: f64,
    pub m: usize,
}

/// Headline numbers of one class's sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauSummary {
    pub class_label: u8,
    pub critical_freq: f64,
    pub nyquist_dt: f64,
    pub best_tau: f64,
    pub knee_tau: f64,
    pub s_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauScoreCurve {
    pub summary: TauSummary,
    pub candidates: Vec<TauCandidate>,
}

/// Uniform-grid values of every signal: `values[i][j]` is signal `i` at
/// `t0_i + j * tau`, for the `m` grid points covering the shortest record.
fn grid_values(signals: &[TimeSeries], tau: f64, m: usize) -> Result<Vec<Vec<f64>>> {
    signals
        .iter()
        .map(|s| {
            let mut u = resample(s, tau)?.u;
            u.truncate(m);
            Ok(u)
        })
        .collect()
}

fn grid_size(t: f64, tau: f64) -> usize {
    ((t / tau) * (1.0 + 1e-12)).floor() as usize + 1
}

/// Scores `n_candidates` log-spaced intervals of `band` for `class`.
///
/// `signals` holds every labeled record; the F-score compares `class`
/// against the rest and the redundancy is measured on the class's own
/// records. The grid spans the shortest record.
pub fn sweep_tau(signals: &[TimeSeries], class: u8, band: &NyquistBand, cfg: &TauConfig) -> Result<TauScoreCurve> {
    if cfg.n_candidates == 0 {
        return Err(Error::InvalidConfig("n_candidates must be positive".into()));
    }
    let is_class: Vec<bool> = signals.iter().map(|s| s.label == Some(class)).collect();
    let n_in = is_class.iter().filter(|&&b| b).count();
    if n_in < 2 || signals.len() - n_in < 2 {
        return Err(Error::DegenerateClasses(
            "class-versus-rest needs two records on each side",
        ));
    }
    let t = signals.iter().map(|s| s.span()).fold(f64::INFINITY, f64::min);
    if !(band.hi < t) {
        return Err(Error::InvalidStep { dt: band.hi, span: t });
    }
    let m_ref = grid_size(t, band.nyquist_dt);
    let lambda_m = cfg.lambda_m_scale * t / m_ref as f64;
    let taus = logspace(band.lo, band.hi, cfg.n_candidates);

    let candidates = taus
        .par_iter()
        .map(|&tau| {
            let m = grid_size(t, tau);
            let values = grid_values(signals, tau, m)?;
            let mut inside = Vec::with_capacity(n_in);
            let mut outside = Vec::with_capacity(signals.len() - n_in);
            let mut f_sum = 0.0;
            for j in 0..m {
                inside.clear();
                outside.clear();
                for (v, &c) in values.iter().zip(&is_class) {
                    if c {
                        inside.push(v[j])
                    } else {
                        outside.push(v[j])
                    }
                }
                f_sum += anova_f_score(&[&inside, &outside], cfg.epsilon)?;
            }
            let mean_f = f_sum / m as f64;
            let columns: Vec<Vec<f64>> = (0..m)
                .map(|j| {
                    values
                        .iter()
                        .zip(&is_class)
                        .filter(|(_, &c)| c)
                        .map(|(v, _)| v[j])
                        .collect()
                })
                .collect();
            let grid: Vec<f64> = (0..m).map(|j| j as f64 * tau).collect();
            let r = if m >= 2 {
                redundancy_penalty(&columns, &grid, band.nyquist_dt)?
            } else {
                0.0
            };
            Ok(TauCandidate {
                tau,
                s: combined_score(mean_f, r, m, t, cfg.lambda_r, lambda_m),
                mean_f,
                r,
                m,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let best = candidates
        .iter()
        .enumerate()
        .fold(0, |b, (i, c)| if c.s > candidates[b].s { i } else { b });
    let xs: Vec<f64> = candidates.iter().map(|c| c.tau).collect();
    let ys: Vec<f64> = candidates.iter().map(|c| c.s).collect();
    let knee = knee_index(&xs, &ys);
    Ok(TauScoreCurve {
        summary: TauSummary {
            class_label: class,
            critical_freq: 1.0 / (2.0 * band.nyquist_dt),
            nyquist_dt: band.nyquist_dt,
            best_tau: candidates[best].tau,
            knee_tau: candidates[knee].tau,
            s_star: candidates[best].s,
        },
        candidates,
    })
}

/// Class-averaged Welch PSD. Every record is first put on the finest native
/// grid found among `signals` so that all estimates share a frequency axis.
pub fn class_psd(signals: &[TimeSeries], class: u8, cfg: &TauConfig) -> Result<PsdEstimate> {
    let dt = signals.iter().map(|s| s.median_dt()).fold(f64::INFINITY, f64::min);
    let members: Vec<&TimeSeries> = signals.iter().filter(|s| s.label == Some(class)).collect();
    if members.is_empty() {
        return Err(Error::MissingClass(class));
    }
    let uniform = members.iter().map(|s| resample(s, dt)).collect::<Result<Vec<_>>>()?;
    let shortest = uniform.iter().map(|u| u.len()).min().unwrap_or(0);
    let nperseg = cfg.nperseg.min(shortest);
    let psds = uniform
        .iter()
        .map(|u| estimate_psd(u, nperseg))
        .collect::<Result<Vec<_>>>()?;
    PsdEstimate::average(&psds)
}

/// Runs the full per-class search for every label present in `signals`,
/// classes in ascending order.
pub fn sweep_all_classes(signals: &[TimeSeries], cfg: &TauConfig) -> Result<Vec<TauScoreCurve>> {
    let mut labels: Vec<u8> = signals.iter().filter_map(|s| s.label).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() < 2 {
        return Err(Error::DegenerateClasses("need at least two labeled classes"));
    }
    if signals.iter().any(|s| s.label.is_none()) {
        return Err(Error::InvalidConfig("every record needs a label".into()));
    }
    labels
        .par_iter()
        .map(|&c| {
            let psd = class_psd(signals, c, cfg)?;
            let f_star = critical_frequency(&psd, cfg.energy_fraction)?;
            let band = nyquist_band(f_star, cfg.beta, cfg.gamma)?;
            let mut curve = sweep_tau(signals, c, &band, cfg)?;
            curve.summary.critical_freq = f_star;
            Ok(curve)
        })
        .collect()
}

/// Score-weighted common intervals with the Nyquist floor applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommonTau {
    pub tau_best_common: f64,
    pub tau_knee_common: f64,
    /// Largest per-class Nyquist interval.
    pub constraint_floor: f64,
}

/// `sum tau_c S*_c / sum S*_c` for the best and knee intervals, each raised
/// to at least `max_c nyquist_dt_c`.
pub fn common_tau(summaries: &[TauSummary]) -> Result<CommonTau> {
    if summaries.is_empty() {
        return Err(Error::InvalidConfig("no class curves".into()));
    }
    if summaries.iter().any(|s| !(s.s_star > 0.0)) {
        return Err(Error::InvalidConfig("every S* must be positive".into()));
    }
    let weight: f64 = summaries.iter().map(|s| s.s_star).sum();
    let weighted = |f: fn(&TauSummary) -> f64| summaries.iter().map(|s| f(s) * s.s_star).sum::<f64>() / weight;
    let floor = summaries.iter().map(|s| s.nyquist_dt).fold(f64::NEG_INFINITY, f64::max);
    Ok(CommonTau {
        tau_best_common: weighted(|s| s.best_tau).max(floor),
        tau_knee_common: weighted(|s| s.knee_tau).max(floor),
        constraint_floor: floor,
    })
}
