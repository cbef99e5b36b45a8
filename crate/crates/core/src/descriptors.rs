//! Seven-dimensional signal descriptors and class-separability analysis.
//!
//! A signal is summarized by
//! `[sampen, permen, hfd, sflat, scent, rms, p95]`: sample entropy,
//! normalized permutation entropy, Higuchi fractal dimension, spectral
//! flatness, spectral centroid, root mean square and the 95th percentile of
//! the absolute amplitude. After min-max normalization across the dataset the
//! class centroids, their pairwise Euclidean distances and a Monte Carlo
//! estimate of the pairwise density overlap quantify how hard each pair of
//! classes is to tell apart.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dsp::{fft_real, mean, std_dev};
use crate::error::{Error, Result};
use crate::signal::UniformSeries;

/// Number of descriptor components.
pub const DIM: usize = 7;

/// Column names in output order.
pub const NAMES: [&str; DIM] = ["sampen", "permen", "hfd", "sflat", "scent", "rms", "p95"];

/// Finite stand-in for `-ln(0)` when no length-`m+1` template pair matches.
pub const SAMPEN_CAP: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptorVector {
    pub sampen: f64,
    pub permen: f64,
    pub hfd: f64,
    pub sflat: f64,
    /// Hz.
    pub scent: f64,
    pub rms: f64,
    pub p95: f64,
}

impl DescriptorVector {
    pub fn to_array(&self) -> [f64; DIM] {
        [
            self.sampen,
            self.permen,
            self.hfd,
            self.sflat,
            self.scent,
            self.rms,
            self.p95,
        ]
    }

    pub fn from_array(a: [f64; DIM]) -> Self {
        Self {
            sampen: a[0],
            permen: a[1],
            hfd: a[2],
            sflat: a[3],
            scent: a[4],
            rms: a[5],
            p95: a[6],
        }
    }
}

/// Hyperparameters of the entropy and fractal descriptors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DescriptorParams {
    pub sampen_m: usize,
    /// Tolerance as a fraction of the signal's standard deviation.
    pub sampen_r: f64,
    pub perm_order: usize,
    pub perm_delay: usize,
    pub hfd_kmax: usize,
    /// Sample entropy is quadratic in length; it is evaluated on the central
    /// `entropy_max_len` samples only.
    pub entropy_max_len: usize,
}

impl Default for DescriptorParams {
    fn default() -> Self {
        Self {
            sampen_m: 2,
            sampen_r: 0.2,
            perm_order: 3,
            perm_delay: 1,
            hfd_kmax: 10,
            entropy_max_len: 2000,
        }
    }
}

/// Sample entropy `-ln(A/B)` with Chebyshev distance, tolerance
/// `r_frac * std(u)` and self-matches excluded. `B` counts matching template
/// pairs of length `m`, `A` of length `m + 1`, both over the first `N - m`
/// start positions.
///
/// Returns [`SAMPEN_CAP`] when `A = 0` and [`Error::DegenerateSignal`] when
/// `B = 0`.
pub fn sample_entropy(u: &[f64], m: usize, r_frac: f64) -> Result<f64> {
    let n = u.len();
    if m == 0 || n < m + 2 {
        return Err(Error::TooShort { needed: m + 2, got: n });
    }
    let r = r_frac * std_dev(u);
    let templates = n - m;
    let (mut a, mut b) = (0u64, 0u64);
    for i in 0..templates {
        for j in i + 1..templates {
            let mut matched = true;
            for k in 0..m {
                if (u[i + k] - u[j + k]).abs() > r {
                    matched = false;
                    break;
                }
            }
            if matched {
                b += 1;
                if (u[i + m] - u[j + m]).abs() <= r {
                    a += 1;
                }
            }
        }
    }
    if b == 0 {
        return Err(Error::DegenerateSignal("no template pairs match at length m"));
    }
    if a == 0 {
        return Ok(SAMPEN_CAP);
    }
    Ok(-(a as f64 / b as f64).ln())
}

/// Ordinal pattern of `order` samples spaced `delay` apart starting at
/// `start`, encoded as the argsort permutation (stable, so ties rank by
/// position) in base `order`.
fn ordinal_pattern(u: &[f64], start: usize, order: usize, delay: usize) -> usize {
    let mut idx: [usize; 8] = [0; 8];
    for (k, slot) in idx.iter_mut().enumerate().take(order) {
        *slot = k;
    }
    let idx = &mut idx[..order];
    idx.sort_by(|&a, &b| u[start + a * delay].total_cmp(&u[start + b * delay]));
    idx.iter().fold(0, |acc, &k| acc * order + k)
}

/// Shannon entropy of the ordinal-pattern distribution divided by
/// `ln(order!)`, so the result lies in `[0, 1]`.
pub fn permutation_entropy(u: &[f64], order: usize, delay: usize) -> Result<f64> {
    if !(2..=7).contains(&order) || delay == 0 {
        return Err(Error::InvalidConfig(format!(
            "permutation entropy order {order} / delay {delay}"
        )));
    }
    let span = (order - 1) * delay + 1;
    if u.len() < span {
        return Err(Error::TooShort {
            needed: span,
            got: u.len(),
        });
    }
    let windows = u.len() - span + 1;
    let mut counts = vec![0u64; order.pow(order as u32)];
    for s in 0..windows {
        counts[ordinal_pattern(u, s, order, delay)] += 1;
    }
    let total = windows as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    let max_h: f64 = (2..=order).map(|k| (k as f64).ln()).sum();
    Ok((h / max_h).clamp(0.0, 1.0))
}

/// Higuchi fractal dimension: the least-squares slope of `ln L(k)` against
/// `ln(1/k)` for `k = 1..=kmax`, where `L(k)` is the mean normalized curve
/// length over the `k` decimated sub-series.
pub fn higuchi_fd(u: &[f64], kmax: usize) -> Result<f64> {
    let n = u.len();
    if kmax < 2 {
        return Err(Error::InvalidConfig(format!("kmax {kmax} < 2")));
    }
    if n < 2 * kmax {
        return Err(Error::TooShort {
            needed: 2 * kmax,
            got: n,
        });
    }
    let mut xs = Vec::with_capacity(kmax);
    let mut ys = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let mut total = 0.0;
        let mut used = 0usize;
        for m in 0..k {
            let steps = (n - 1 - m) / k;
            if steps == 0 {
                continue;
            }
            let length: f64 = (1..=steps).map(|i| (u[m + i * k] - u[m + (i - 1) * k]).abs()).sum();
            total += length * (n - 1) as f64 / (steps * k) as f64 / k as f64;
            used += 1;
        }
        let lk = total / used as f64;
        if !(lk > 0.0) {
            return Err(Error::DegenerateSignal("zero curve length in Higuchi construction"));
        }
        xs.push((1.0 / k as f64).ln());
        ys.push(lk.ln());
    }
    Ok(ols_slope(&xs, &ys))
}

fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// One-sided periodogram `|X_k|^2` for `k = 1..=N/2` (DC excluded) with the
/// matching frequencies.
fn one_sided_power(u: &[f64], dt: f64) -> (Vec<f64>, Vec<f64>) {
    let n = u.len();
    let spec = fft_real(u);
    let df = 1.0 / (n as f64 * dt);
    (1..=n / 2).map(|k| (k as f64 * df, spec[k].norm_sqr())).unzip()
}

/// Ratio of geometric to arithmetic mean of the one-sided power spectrum, DC
/// excluded. Zero bins are floored at `1e-20` before taking logarithms.
pub fn spectral_flatness(u: &[f64], dt: f64) -> Result<f64> {
    if u.len() < 16 {
        return Err(Error::TooShort {
            needed: 16,
            got: u.len(),
        });
    }
    let (_, p) = one_sided_power(u, dt);
    let am = mean(&p);
    if !(am > 0.0) {
        return Ok(0.0);
    }
    let gm = (p.iter().map(|v| v.max(1e-20).ln()).sum::<f64>() / p.len() as f64).exp();
    Ok((gm / am).clamp(0.0, 1.0))
}

/// Power-weighted mean frequency (Hz) of the one-sided spectrum, DC excluded.
pub fn spectral_centroid(u: &[f64], dt: f64) -> Result<f64> {
    if u.len() < 16 {
        return Err(Error::TooShort {
            needed: 16,
            got: u.len(),
        });
    }
    let (f, p) = one_sided_power(u, dt);
    let total: f64 = p.iter().sum();
    if !(total > 0.0) {
        return Err(Error::SilentSignal);
    }
    Ok(f.iter().zip(&p).map(|(f, p)| f * p).sum::<f64>() / total)
}

pub fn rms(u: &[f64]) -> f64 {
    (u.iter().map(|v| v * v).sum::<f64>() / u.len().max(1) as f64).sqrt()
}

/// Type-7 (linear interpolation) quantile of `v`, which is sorted in place.
pub fn quantile_in_place(v: &mut [f64], q: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// 95th percentile of `|u|`.
pub fn p95_abs(u: &[f64]) -> f64 {
    if u.is_empty() {
        return 0.0;
    }
    let mut a: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    quantile_in_place(&mut a, 0.95)
}

fn central(u: &[f64], max_len: usize) -> &[f64] {
    if u.len() <= max_len {
        u
    } else {
        let start = (u.len() - max_len) / 2;
        &u[start..start + max_len]
    }
}

/// Assembles the seven descriptors of one signal.
pub fn descriptor_vector(s: &UniformSeries, params: &DescriptorParams) -> Result<DescriptorVector> {
    if s.is_empty() {
        return Err(Error::EmptySignal(0));
    }
    let u = &s.u;
    let core = central(u, params.entropy_max_len);
    Ok(DescriptorVector {
        sampen: sample_entropy(core, params.sampen_m, params.sampen_r)?,
        permen: permutation_entropy(u, params.perm_order, params.perm_delay)?,
        hfd: higuchi_fd(u, params.hfd_kmax)?,
        sflat: spectral_flatness(u, s.dt)?,
        scent: spectral_centroid(u, s.dt)?,
        rms: rms(u),
        p95: p95_abs(u),
    })
}

/// Component-wise extrema used by [`minmax_normalize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: [f64; DIM],
    pub max: [f64; DIM],
}

impl FeatureRange {
    pub fn apply(&self, x: &[f64; DIM]) -> [f64; DIM] {
        let mut out = [0.0; DIM];
        for d in 0..DIM {
            let span = self.max[d] - self.min[d];
            out[d] = if span > 0.0 {
                ((x[d] - self.min[d]) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
        out
    }
}

/// Min-max normalizes every component to `[0, 1]` across the given vectors.
/// A component that is constant across the set maps to 0.
pub fn minmax_normalize(vectors: &[DescriptorVector]) -> Result<(Vec<[f64; DIM]>, FeatureRange)> {
    if vectors.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: vectors.len(),
        });
    }
    let mut range = FeatureRange {
        min: [f64::INFINITY; DIM],
        max: [f64::NEG_INFINITY; DIM],
    };
    for v in vectors {
        for (d, x) in v.to_array().into_iter().enumerate() {
            range.min[d] = range.min[d].min(x);
            range.max[d] = range.max[d].max(x);
        }
    }
    let normalized = vectors.iter().map(|v| range.apply(&v.to_array())).collect();
    Ok((normalized, range))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub label: u8,
    pub count: usize,
    pub centroid: [f64; DIM],
}

/// Class centroids and the symmetric matrix of centroid distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separability {
    pub classes: Vec<ClassStats>,
    pub distances: Vec<Vec<f64>>,
}

impl Separability {
    /// Off-diagonal pair `(i, j)`, `i < j`, with the smallest distance.
    pub fn closest_pair(&self) -> Option<(u8, u8)> {
        let n = self.classes.len();
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            for j in i + 1..n {
                let d = self.distances[i][j];
                if best.is_none_or(|(b, _, _)| d < b) {
                    best = Some((d, i, j));
                }
            }
        }
        best.map(|(_, i, j)| (self.classes[i].label, self.classes[j].label))
    }
}

/// Centroid of each class `0..n_classes` and `d(i, j) = |mu_i - mu_j|_2`.
pub fn class_centroids_and_distances(
    normalized: &[[f64; DIM]],
    labels: &[u8],
    n_classes: usize,
) -> Result<Separability> {
    if normalized.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: normalized.len(),
            right: labels.len(),
        });
    }
    let mut classes = Vec::with_capacity(n_classes);
    for c in 0..n_classes as u8 {
        let members: Vec<&[f64; DIM]> = normalized
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(x, _)| x)
            .collect();
        if members.is_empty() {
            return Err(Error::MissingClass(c));
        }
        let mut centroid = [0.0; DIM];
        for x in &members {
            for d in 0..DIM {
                centroid[d] += x[d];
            }
        }
        centroid.iter_mut().for_each(|v| *v /= members.len() as f64);
        classes.push(ClassStats {
            label: c,
            count: members.len(),
            centroid,
        });
    }
    let distances = (0..n_classes)
        .map(|i| {
            (0..n_classes)
                .map(|j| {
                    classes[i]
                        .centroid
                        .iter()
                        .zip(&classes[j].centroid)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        })
        .collect();
    Ok(Separability { classes, distances })
}

/// Variance floor applied per feature when fitting class densities.
pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone)]
struct DiagGaussian {
    mean: Vec<f64>,
    var: Vec<f64>,
    log_norm: f64,
}

impl DiagGaussian {
    fn fit(label: u8, points: &[&[f64]]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DegenerateClass(label));
        }
        let dim = points[0].len();
        let n = points.len() as f64;
        let mut mean = vec![0.0; dim];
        for p in points {
            for d in 0..dim {
                mean[d] += p[d] / n;
            }
        }
        let mut var = vec![0.0; dim];
        for p in points {
            for d in 0..dim {
                var[d] += (p[d] - mean[d]).powi(2) / n;
            }
        }
        if var.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateClass(label));
        }
        var.iter_mut().for_each(|v| *v = v.max(VARIANCE_FLOOR));
        let log_norm = -0.5 * var.iter().map(|v| (2.0 * std::f64::consts::PI * v).ln()).sum::<f64>();
        Ok(Self { mean, var, log_norm })
    }

    fn log_pdf(&self, x: &[f64]) -> f64 {
        self.log_norm
            - 0.5
                * x.iter()
                    .zip(&self.mean)
                    .zip(&self.var)
                    .map(|((x, m), v)| (x - m) * (x - m) / v)
                    .sum::<f64>()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for d in 0..self.mean.len() {
            let z: f64 = rng.sample(StandardNormal);
            out[d] = self.mean[d] + z * self.var[d].sqrt();
        }
    }
}

/// Pairwise overlap `Omega_ij` and the aggregate over ordered pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    /// Symmetric, with ones on the diagonal.
    pub pairwise: Vec<Vec<f64>>,
    /// Sum of `Omega_ij` over all ordered pairs `i != j`.
    pub aggregate: f64,
}

/// Estimates `Omega_ij = integral of min(p_i, p_j)` for every class pair.
///
/// Each class density is a diagonal-covariance Gaussian fitted to its points.
/// The integral is estimated by importance sampling from the equal mixture
/// `q = (p_i + p_j) / 2`: the weight `min(p_i, p_j) / q` equals
/// `2 / (1 + exp(|ln p_i - ln p_j|))`, which stays finite in the tails.
pub fn overlap_omega<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    labels: &[u8],
    n_classes: usize,
    n_mc: usize,
    rng: &mut R,
) -> Result<Overlap> {
    if points.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: points.len(),
            right: labels.len(),
        });
    }
    if n_mc == 0 {
        return Err(Error::InvalidConfig("n_mc must be positive".into()));
    }
    let mut models = Vec::with_capacity(n_classes);
    for c in 0..n_classes as u8 {
        let members: Vec<&[f64]> = points
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(p, _)| p.as_slice())
            .collect();
        if members.is_empty() {
            return Err(Error::MissingClass(c));
        }
        models.push(DiagGaussian::fit(c, &members)?);
    }
    let dim = points.first().map_or(0, Vec::len);
    let mut pairwise = vec![vec![1.0; n_classes]; n_classes];
    let mut aggregate = 0.0;
    let mut x = vec![0.0; dim];
    for i in 0..n_classes {
        for j in i + 1..n_classes {
            let (pi, pj) = (&models[i], &models[j]);
            let mut acc = 0.0;
            for _ in 0..n_mc {
                if rng.random_bool(0.5) {
                    pi.sample(rng, &mut x);
                } else {
                    pj.sample(rng, &mut x);
                }
                let gap = (pi.log_pdf(&x) - pj.log_pdf(&x)).abs();
                acc += 2.0 / (1.0 + gap.exp());
            }
            let omega = (acc / n_mc as f64).clamp(0.0, 1.0);
            pairwise[i][j] = omega;
            pairwise[j][i] = omega;
            aggregate += 2.0 * omega;
        }
    }
    Ok(Overlap { pairwise, aggregate })
}
