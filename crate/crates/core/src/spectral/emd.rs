//! Empirical mode decomposition and its complete-ensemble, adaptive-noise
//! variant (CEEMDAN).
//!
//! Sifting uses natural cubic-spline envelopes through the local extrema,
//! with the two outermost extrema on each side mirrored about the boundary
//! samples. A sift stops on the Cauchy criterion
//! `sum (h_prev - h)^2 / sum h_prev^2 < sd_threshold` or after
//! `max_sift` iterations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dsp::{derive_seed, std_dev};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CeemdanConfig {
    pub ensemble_size: usize,
    /// Noise standard deviation relative to the current residue's.
    pub noise_std_fraction: f64,
    pub max_imfs: usize,
    pub sd_threshold: f64,
    pub max_sift: usize,
}

impl Default for CeemdanConfig {
    fn default() -> Self {
        Self {
            ensemble_size: 50,
            noise_std_fraction: 0.2,
            max_imfs: 10,
            sd_threshold: 0.2,
            max_sift: 50,
        }
    }
}

/// Intrinsic mode functions plus the final residue. `input = sum(imfs) +
/// residue` holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImfSet {
    pub imfs: Vec<Vec<f64>>,
    pub residue: Vec<f64>,
    /// False if any sift hit `max_sift` before meeting the stop criterion.
    pub converged: bool,
}

impl ImfSet {
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residue.clone();
        for imf in &self.imfs {
            for (o, v) in out.iter_mut().zip(imf) {
                *o += v;
            }
        }
        out
    }
}

/// Indices of strict local maxima and minima (plateaus count once, at their
/// first sample).
pub fn extrema(x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    let n = x.len();
    let mut i = 1;
    while i + 1 < n {
        let mut j = i;
        while j + 1 < n && x[j + 1] == x[i] {
            j += 1;
        }
        if j + 1 >= n {
            break;
        }
        if x[i] > x[i - 1] && x[i] > x[j + 1] {
            maxima.push(i);
        } else if x[i] < x[i - 1] && x[i] < x[j + 1] {
            minima.push(i);
        }
        i = j + 1;
    }
    (maxima, minima)
}

pub fn count_extrema(x: &[f64]) -> usize {
    let (a, b) = extrema(x);
    a.len() + b.len()
}

/// Natural cubic spline through `(xs, ys)` evaluated at `0..n`.
fn spline_eval(xs: &[f64], ys: &[f64], n: usize) -> Vec<f64> {
    let m = xs.len();
    if m == 1 {
        return vec![ys[0]; n];
    }
    // Second derivatives via the tridiagonal system (Thomas algorithm).
    let mut m2 = vec![0.0; m];
    if m > 2 {
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        for i in 1..m - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            let a = h0;
            let b = 2.0 * (h0 + h1);
            let cc = h1;
            let rhs = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            let denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (rhs - a * d[i - 1]) / denom;
        }
        for i in (1..m - 1).rev() {
            m2[i] = d[i] - c[i] * m2[i + 1];
        }
    }
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for t in 0..n {
        let x = t as f64;
        while seg + 2 < m && xs[seg + 1] < x {
            seg += 1;
        }
        let (x0, x1) = (xs[seg], xs[seg + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        out.push(
            a * ys[seg] + b * ys[seg + 1] + ((a * a * a - a) * m2[seg] + (b * b * b - b) * m2[seg + 1]) * h * h / 6.0,
        );
    }
    out
}

/// Envelope through the extrema at `idx`, mirrored about both boundaries.
fn envelope(x: &[f64], idx: &[usize]) -> Vec<f64> {
    let n = x.len();
    let last = (n - 1) as f64;
    let take = idx.len().min(2);
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(idx.len() + 2 * take);
    for &i in idx[..take].iter().rev() {
        pts.push((-(i as f64), x[i]));
    }
    pts.extend(idx.iter().map(|&i| (i as f64, x[i])));
    for &i in idx[idx.len() - take..].iter().rev() {
        pts.push((2.0 * last - i as f64, x[i]));
    }
    pts.dedup_by(|a, b| a.0 == b.0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    spline_eval(&xs, &ys, n)
}

/// Extracts the first IMF of `x` by sifting. Returns `None` when `x` has
/// fewer than three extrema (no oscillation left to extract).
pub fn sift_first(x: &[f64], sd_threshold: f64, max_sift: usize) -> Option<(Vec<f64>, bool)> {
    if count_extrema(x) < 3 {
        return None;
    }
    let mut h = x.to_vec();
    for _ in 0..max_sift {
        let (maxima, minima) = extrema(&h);
        if maxima.is_empty() || minima.is_empty() {
            return Some((h, true));
        }
        let upper = envelope(&h, &maxima);
        let lower = envelope(&h, &minima);
        let next: Vec<f64> = h
            .iter()
            .zip(upper.iter().zip(&lower))
            .map(|(v, (u, l))| v - 0.5 * (u + l))
            .collect();
        let num: f64 = h.iter().zip(&next).map(|(a, b)| (a - b) * (a - b)).sum();
        let den: f64 = h.iter().map(|a| a * a).sum();
        h = next;
        if den == 0.0 || num / den < sd_threshold {
            return Some((h, true));
        }
    }
    Some((h, false))
}

/// Plain EMD: successive first-IMF extraction on the running residue.
pub fn emd(x: &[f64], max_imfs: usize, sd_threshold: f64, max_sift: usize) -> ImfSet {
    let mut residue = x.to_vec();
    let mut imfs = Vec::new();
    let mut converged = true;
    while imfs.len() < max_imfs {
        let Some((imf, ok)) = sift_first(&residue, sd_threshold, max_sift) else {
            break;
        };
        converged &= ok;
        for (r, v) in residue.iter_mut().zip(&imf) {
            *r -= v;
        }
        imfs.push(imf);
    }
    ImfSet {
        imfs,
        residue,
        converged,
    }
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let s = std_dev(&v);
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    v
}

/// CEEMDAN decomposition of `x`, deterministic under `seed`.
///
/// Stage 1 averages the first EMD mode of `x + eps_0 w_i` over the ensemble
/// of white-noise realizations `w_i`. Stage `k > 1` averages the first mode
/// of `r_{k-1} + eps_{k-1} E_{k-1}(w_i)`, where `E_j` is the `j`-th EMD mode
/// of the noise (normalized to unit variance) and
/// `eps_k = noise_std_fraction * std(r_k)`. Decomposition stops once the
/// residue has fewer than three extrema or `max_imfs` modes were extracted.
pub fn ceemdan(x: &[f64], cfg: &CeemdanConfig, seed: u64) -> Result<ImfSet> {
    if x.len() < 64 {
        return Err(Error::TooShort {
            needed: 64,
            got: x.len(),
        });
    }
    if cfg.ensemble_size == 0 {
        return Err(Error::InvalidConfig("ensemble_size must be positive".into()));
    }
    let n = x.len();
    let noise_modes: Vec<Vec<Vec<f64>>> = (0..cfg.ensemble_size)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let w: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut modes: Vec<Vec<f64>> = emd(&w, cfg.max_imfs, cfg.sd_threshold, cfg.max_sift)
                .imfs
                .into_iter()
                .map(normalized)
                .collect();
            // Stage 1 perturbs with the raw (unit-variance) noise itself.
            modes.insert(0, w);
            modes
        })
        .collect();

    let mut residue = x.to_vec();
    let mut imfs: Vec<Vec<f64>> = Vec::new();
    let mut converged = true;
    while imfs.len() < cfg.max_imfs && count_extrema(&residue) >= 3 {
        let stage = imfs.len();
        let eps = cfg.noise_std_fraction * std_dev(&residue);
        let mut acc = vec![0.0; n];
        let mut members = 0usize;
        for modes in &noise_modes {
            let perturbed: Vec<f64> = match modes.get(stage) {
                Some(m) => residue.iter().zip(m).map(|(r, w)| r + eps * w).collect(),
                None => residue.clone(),
            };
            if let Some((mode, ok)) = sift_first(&perturbed, cfg.sd_threshold, cfg.max_sift) {
                converged &= ok;
                acc.iter_mut().zip(&mode).for_each(|(a, m)| *a += m);
                members += 1;
            }
        }
        if members == 0 {
            break;
        }
        let imf: Vec<f64> = acc.into_iter().map(|v| v / members as f64).collect();
        for (r, v) in residue.iter_mut().zip(&imf) {
            *r -= v;
        }
        imfs.push(imf);
    }
    // Recompute the residue against the input so the decomposition is
    // complete up to the summation round-off only.
    let mut sum = vec![0.0; n];
    for imf in &imfs {
        sum.iter_mut().zip(imf).for_each(|(s, v)| *s += v);
    }
    let residue = x.iter().zip(&sum).map(|(a, s)| a - s).collect();
    Ok(ImfSet {
        imfs,
        residue,
        converged,
    })
}

/// `z6 = sum ||IMF_i||^2 / ||x||^2`, the residue excluded.
pub fn energy_ratio(x: &[f64], imfs: &ImfSet) -> Result<f64> {
    let total: f64 = x.iter().map(|v| v * v).sum();
    if !(total > 0.0) {
        return Err(Error::SilentSignal);
    }
    let modes: f64 = imfs.imfs.iter().map(|m| m.iter().map(|v| v * v).sum::<f64>()).sum();
    Ok(modes / total)
}
