//! Condensed stability indices across models: mean, population standard
//! deviation, coefficient of variation and the balanced score
//! `BS = mean * (1 - CV)`.

use serde::{Deserialize, Serialize};

use crate::dsp::mean;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStability {
    pub mean: f64,
    pub std: f64,
    /// `None` when the mean is zero.
    pub cv: Option<f64>,
    pub balanced_score: Option<f64>,
}

pub fn balanced_score(mean: f64, cv: f64) -> f64 {
    mean * (1.0 - cv)
}

pub fn metric_stability(values: &[f64]) -> Result<MetricStability> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("no values for stability".into()));
    }
    let mu = mean(values);
    let std = (values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / values.len() as f64).sqrt();
    let cv = (mu != 0.0).then(|| std / mu.abs());
    Ok(MetricStability {
        mean: mu,
        std,
        cv,
        balanced_score: cv.map(|c| balanced_score(mu, c)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodStability {
    pub method: String,
    pub n_models: usize,
    pub accuracy: MetricStability,
    pub macro_f1: MetricStability,
    pub macro_auc: MetricStability,
}

impl MethodStability {
    /// Mean of the three balanced scores; `None` if any is undefined.
    pub fn overall(&self) -> Option<f64> {
        let s = [self.accuracy, self.macro_f1, self.macro_auc];
        let bs: Option<Vec<f64>> = s.iter().map(|m| m.balanced_score).collect();
        bs.map(|v| v.iter().sum::<f64>() / 3.0)
    }
}

/// One report row per method from per-model `[accuracy, macro_f1,
/// macro_auc]` values (each typically a mean over folds).
pub fn stability_report(methods: &[(String, Vec<[f64; 3]>)]) -> Result<Vec<MethodStability>> {
    if methods.is_empty() {
        return Err(Error::InvalidConfig("no methods for stability".into()));
    }
    methods
        .iter()
        .map(|(name, rows)| {
            let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
            Ok(MethodStability {
                method: name.clone(),
                n_models: rows.len(),
                accuracy: metric_stability(&col(0))?,
                macro_f1: metric_stability(&col(1))?,
                macro_auc: metric_stability(&col(2))?,
            })
        })
        .collect()
}

/// Methods sorted by [`MethodStability::overall`], best first; undefined
/// scores go last, ties keep input order.
pub fn ranking(report: &[MethodStability]) -> Vec<&MethodStability> {
    let mut out: Vec<&MethodStability> = report.iter().collect();
    out.sort_by(|a, b| {
        let key = |m: &MethodStability| m.overall().unwrap_or(f64::NEG_INFINITY);
        key(b).total_cmp(&key(a))
    });
    out
}
