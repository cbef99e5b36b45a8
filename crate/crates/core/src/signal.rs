//! Signal containers, resampling onto a uniform grid, boundary trimming and
//! fixed-length windowing.
//!
//! Everything downstream consumes [`UniformSeries`]; raw measurements enter as
//! [`TimeSeries`], which may be irregularly sampled.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A (possibly irregularly) sampled displacement record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    t: Vec<f64>,
    u: Vec<f64>,
    pub label: Option<u8>,
    pub source_id: String,
}

impl TimeSeries {
    /// Builds a record, checking that `t` and `u` have equal length (at least
    /// two samples), are finite, and that `t` is strictly increasing.
    pub fn new(t: Vec<f64>, u: Vec<f64>, label: Option<u8>, source_id: impl Into<String>) -> Result<Self> {
        if t.len() != u.len() {
            return Err(Error::LengthMismatch {
                left: t.len(),
                right: u.len(),
            });
        }
        if t.len() < 2 {
            return Err(Error::EmptySignal(t.len()));
        }
        if t.iter().chain(u.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal("non-finite sample".into()));
        }
        if let Some(j) = t.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSignal(format!(
                "time stamps not strictly increasing at index {}",
                j + 1
            )));
        }
        Ok(Self {
            t,
            u,
            label,
            source_id: source_id.into(),
        })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `t_max - t_min` in seconds.
    pub fn span(&self) -> f64 {
        self.t[self.t.len() - 1] - self.t[0]
    }

    /// Median spacing between consecutive time stamps.
    pub fn median_dt(&self) -> f64 {
        let mut d: Vec<f64> = self.t.windows(2).map(|w| w[1] - w[0]).collect();
        d.sort_by(f64::total_cmp);
        let n = d.len();
        if n % 2 == 1 {
            d[n / 2]
        } else {
            0.5 * (d[n / 2 - 1] + d[n / 2])
        }
    }

    /// Linear interpolation at `x`, which must lie inside `[t_min, t_max]`.
    /// `hint` is the bracket index found by the previous call and is updated;
    /// it makes a monotone sweep over query points linear overall.
    pub(crate) fn interp_from(&self, x: f64, hint: &mut usize) -> f64 {
        let t = &self.t;
        let n = t.len();
        let mut j = (*hint).min(n - 2);
        while j + 2 < n && t[j + 1] <= x {
            j += 1;
        }
        while j > 0 && t[j] > x {
            j -= 1;
        }
        *hint = j;
        let (t0, t1) = (t[j], t[j + 1]);
        let frac = ((x - t0) / (t1 - t0)).clamp(0.0, 1.0);
        if frac == 0.0 {
            self.u[j]
        } else if frac == 1.0 {
            self.u[j + 1]
        } else {
            self.u[j] + frac * (self.u[j + 1] - self.u[j])
        }
    }
}

impl From<&UniformSeries> for TimeSeries {
    fn from(s: &UniformSeries) -> Self {
        TimeSeries {
            t: s.times(),
            u: s.u.clone(),
            label: s.label,
            source_id: s.source_id.clone(),
        }
    }
}

/// A record on the uniform grid `t_j = t0 + j * dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformSeries {
    pub u: Vec<f64>,
    pub dt: f64,
    pub t0: f64,
    pub label: Option<u8>,
    pub source_id: String,
}

impl UniformSeries {
    pub fn new(u: Vec<f64>, dt: f64, t0: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidStep {
                dt,
                span: dt * u.len() as f64,
            });
        }
        Ok(Self {
            u,
            dt,
            t0,
            label: None,
            source_id: String::new(),
        })
    }

    pub fn with_meta(mut self, label: Option<u8>, source_id: impl Into<String>) -> Self {
        self.label = label;
        self.source_id = source_id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn fs(&self) -> f64 {
        1.0 / self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.u.len()).map(|j| self.t0 + j as f64 * self.dt).collect()
    }
}

/// Fixed-length windows cut from a [`UniformSeries`].
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    pub windows: Vec<Vec<f64>>,
    /// Samples per window.
    pub len: usize,
    /// Samples between consecutive window starts.
    pub hop: usize,
    pub dt: f64,
}

impl WindowSet {
    pub fn count(&self) -> usize {
        self.windows.len()
    }
}

/// Resamples `s` onto the grid `t_min + k * dt` covering `[t_min, t_max]`
/// using linear interpolation. The grid never extends past `t_max`.
pub fn resample(s: &TimeSeries, dt: f64) -> Result<UniformSeries> {
    if s.len() < 2 {
        return Err(Error::EmptySignal(s.len()));
    }
    let span = s.span();
    if !(dt > 0.0) || !dt.is_finite() || dt > span {
        return Err(Error::InvalidStep { dt, span });
    }
    // Tolerate round-off when span is an exact multiple of dt.
    let n = ((span / dt) * (1.0 + 1e-12)).floor() as usize + 1;
    let t0 = s.t[0];
    let mut hint = 0;
    let u = (0..n)
        .map(|k| {
            let x = (t0 + k as f64 * dt).min(s.t[s.len() - 1]);
            s.interp_from(x, &mut hint)
        })
        .collect();
    Ok(UniformSeries {
        u,
        dt,
        t0,
        label: s.label,
        source_id: s.source_id.clone(),
    })
}

/// Drops `floor(alpha * N)` samples from each end of `s`.
pub fn trim(s: &UniformSeries, alpha: f64) -> Result<UniformSeries> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::InvalidConfig(format!("trim fraction {alpha} outside [0, 0.5)")));
    }
    let n = s.len();
    let cut = (alpha * n as f64 + 1e-9).floor() as usize;
    if n < 2 * cut + 2 {
        return Err(Error::TooShort {
            needed: 2 * cut + 2,
            got: n,
        });
    }
    Ok(UniformSeries {
        u: s.u[cut..n - cut].to_vec(),
        dt: s.dt,
        t0: s.t0 + cut as f64 * s.dt,
        label: s.label,
        source_id: s.source_id.clone(),
    })
}

/// Cuts `s` into windows of `len` samples whose starts are `hop` apart. The
/// trailing remainder that does not fill a whole window is discarded.
pub fn windowize(s: &UniformSeries, len: usize, hop: usize) -> Result<WindowSet> {
    if len < 2 {
        return Err(Error::InvalidConfig(format!("window length {len} < 2")));
    }
    if hop == 0 || hop > len {
        return Err(Error::InvalidConfig(format!("hop {hop} outside [1, {len}]")));
    }
    let n = s.len();
    if n < len {
        return Err(Error::TooShort { needed: len, got: n });
    }
    let count = (n - len) / hop + 1;
    let windows = (0..count).map(|m| s.u[m * hop..m * hop + len].to_vec()).collect();
    Ok(WindowSet {
        windows,
        len,
        hop,
        dt: s.dt,
    })
}

/// Window length derived from a duration ratio: `max(8, round(ratio * n))`.
pub fn window_len_for(n: usize, ratio: f64) -> usize {
    ((ratio * n as f64).round() as usize).max(8)
}
