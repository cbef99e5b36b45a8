//! Morlet continuous wavelet transform evaluated in the frequency domain.
//!
//! With `X_k` the DFT of the input and `Psi(w)` the Fourier transform of the
//! mother wavelet, the transform at scale `a` (seconds) is
//! `W(a, .) = IDFT[ X_k * sqrt(a) * conj(Psi(a w_k)) ]`, which is the
//! discretization of `a^{-1/2} int x(t) psi*((t - b) / a) dt`.

use rustfft::num_complex::Complex64;

use crate::dsp::{fft_in_place, fft_real, logspace};
use crate::error::{Error, Result};

/// Morlet center angular frequency.
pub const MORLET_W0: f64 = 6.0;

/// Fourier transform of the analytic Morlet wavelet
/// `pi^{-1/4} exp(i w0 t) exp(-t^2 / 2)`, zero for non-positive frequencies.
fn morlet_hat(w: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else {
        let norm = std::f64::consts::PI.powf(-0.25) * (2.0 * std::f64::consts::PI).sqrt();
        norm * (-0.5 * (w - MORLET_W0).powi(2)).exp()
    }
}

/// `n` log-spaced scales covering `[2 dt, span / 4]`.
pub fn default_scales(len: usize, dt: f64, n: usize) -> Vec<f64> {
    let lo = 2.0 * dt;
    let hi = (len as f64 * dt / 4.0).max(lo);
    logspace(lo, hi, n)
}

/// Pseudo-frequency (Hz) matched to scale `a` for the Morlet wavelet.
pub fn scale_to_frequency(a: f64) -> f64 {
    MORLET_W0 / (2.0 * std::f64::consts::PI * a)
}

/// Modulus `|W(a, b)|` for every scale (rows) and shift (columns).
pub fn cwt_modulus(x: &[f64], dt: f64, scales: &[f64]) -> Result<Vec<Vec<f64>>> {
    if x.len() < 16 {
        return Err(Error::TooShort {
            needed: 16,
            got: x.len(),
        });
    }
    if scales.is_empty() || scales.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::InvalidConfig("cwt scales must be positive and nonempty".into()));
    }
    let n = x.len();
    let spec = fft_real(x);
    let omega: Vec<f64> = (0..n)
        .map(|k| {
            let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            2.0 * std::f64::consts::PI * kk / (n as f64 * dt)
        })
        .collect();
    let mut out = Vec::with_capacity(scales.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for &a in scales {
        let gain = a.sqrt();
        for k in 0..n {
            buf[k] = spec[k] * (gain * morlet_hat(a * omega[k]));
        }
        fft_in_place(&mut buf, true);
        out.push(buf.iter().map(|c| c.norm() / n as f64).collect());
    }
    Ok(out)
}

/// `z5 = max_{a,b} |W(a, b)|` together with the scale index of the maximum.
pub fn cwt_max_with_scale(x: &[f64], dt: f64, scales: &[f64]) -> Result<(f64, usize)> {
    let w = cwt_modulus(x, dt, scales)?;
    let mut best = (0.0, 0);
    for (i, row) in w.iter().enumerate() {
        for &v in row {
            if v > best.0 {
                best = (v, i);
            }
        }
    }
    Ok(best)
}

pub fn cwt_max(x: &[f64], dt: f64, scales: &[f64]) -> Result<f64> {
    Ok(cwt_max_with_scale(x, dt, scales)?.0)
}
