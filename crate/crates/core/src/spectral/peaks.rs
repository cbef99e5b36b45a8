//! Peak-based features of a single magnitude spectrum.
//!
//! All functions take a one-sided magnitude frame `X[k]` with bin 0 at DC.
//! DC never counts as a spectral peak.

/// Dominant amplitude `A1 = max_{k >= 1} X[k]` and its bin `k1`.
/// An all-zero frame yields `(0, 1)`.
pub fn dominant_amplitude(frame: &[f64]) -> (f64, usize) {
    let mut best = (0.0, 1usize.min(frame.len().saturating_sub(1)));
    for (k, &v) in frame.iter().enumerate().skip(1) {
        if v > best.0 {
            best = (v, k);
        }
    }
    best
}

/// Sideband asymmetry `|E_L - E_R| / (E_L + E_R)` with `E_L` the energy in
/// bins `[k1 - delta, k1)` and `E_R` in `(k1, k1 + delta]`, both clipped to
/// the non-DC part of the frame. Zero when both sides are empty.
pub fn sideband_symmetry(frame: &[f64], k1: usize, delta: usize) -> f64 {
    let lo = k1.saturating_sub(delta).max(1);
    let hi = (k1 + delta).min(frame.len().saturating_sub(1));
    let left: f64 = frame[lo.min(k1)..k1].iter().map(|v| v * v).sum();
    let right: f64 = if k1 < hi {
        frame[k1 + 1..=hi].iter().map(|v| v * v).sum()
    } else {
        0.0
    };
    sideband_ratio(left, right)
}

/// `|a - b| / (a + b)`, defined as 0 when `a + b = 0`.
pub fn sideband_ratio(left: f64, right: f64) -> f64 {
    let total = left + right;
    if total > 0.0 {
        ((left - right).abs() / total).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Frequency distance `|f_k2 - f_k1|` to the strongest bin outside a guard
/// band of `guard` bins around `k1`. Zero when no bin outside the guard
/// carries energy.
pub fn second_peak_offset(frame: &[f64], freqs: &[f64], k1: usize, guard: usize) -> f64 {
    let mut best: Option<(f64, usize)> = None;
    for (k, &v) in frame.iter().enumerate().skip(1) {
        if k.abs_diff(k1) <= guard {
            continue;
        }
        if v > 0.0 && best.is_none_or(|(b, _)| v > b) {
            best = Some((v, k));
        }
    }
    best.map_or(0.0, |(_, k2)| (freqs[k2] - freqs[k1]).abs())
}

/// `X[k_2f] / A1` where `k_2f` is the bin nearest to twice the dominant
/// frequency `f1`. Zero if `2 f1` lies beyond the last bin (by more than half
/// a bin) or `A1 = 0`.
pub fn harmonic_ratio(frame: &[f64], freqs: &[f64], f1: f64, a1: f64) -> f64 {
    if !(a1 > 0.0) || freqs.len() < 2 {
        return 0.0;
    }
    let target = 2.0 * f1;
    let df = freqs[1] - freqs[0];
    if target > freqs[freqs.len() - 1] + 0.5 * df {
        return 0.0;
    }
    let k2f = freqs
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .map_or(0, |(k, _)| k);
    frame[k2f] / a1
}
