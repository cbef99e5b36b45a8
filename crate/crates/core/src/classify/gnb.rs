//! Gaussian naive Bayes with diagonal class-conditional covariances.

use crate::classify::softmax::{argmax, softmax};
use crate::error::{Error, Result};

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    /// Log prior per class; `-inf` for classes absent from training.
    pub log_prior: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    pub var: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub fn fit(xs: &[Vec<f64>], ys: &[u8], n_classes: usize) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptyTrain);
        }
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: ys.len(),
            });
        }
        if ys.iter().any(|&y| y as usize >= n_classes) {
            return Err(Error::DegenerateLabels("label outside the class range"));
        }
        let d = xs[0].len();
        let mut count = vec![0usize; n_classes];
        let mut mean = vec![vec![0.0; d]; n_classes];
        for (x, &y) in xs.iter().zip(ys) {
            count[y as usize] += 1;
            mean[y as usize].iter_mut().zip(x).for_each(|(m, v)| *m += v);
        }
        for (m, &c) in mean.iter_mut().zip(&count) {
            m.iter_mut().for_each(|v| *v /= c.max(1) as f64);
        }
        let mut var = vec![vec![0.0; d]; n_classes];
        for (x, &y) in xs.iter().zip(ys) {
            let c = y as usize;
            for j in 0..d {
                var[c][j] += (x[j] - mean[c][j]).powi(2);
            }
        }
        for (v, &c) in var.iter_mut().zip(&count) {
            v.iter_mut()
                .for_each(|s| *s = (*s / c.max(1) as f64).max(VARIANCE_FLOOR));
        }
        let n = xs.len() as f64;
        let log_prior = count
            .iter()
            .map(|&c| if c > 0 { (c as f64 / n).ln() } else { f64::NEG_INFINITY })
            .collect();
        Ok(Self { log_prior, mean, var })
    }

    /// Unnormalized log posterior per class.
    pub fn log_joint(&self, x: &[f64]) -> Vec<f64> {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        (0..self.log_prior.len())
            .map(|c| {
                if self.log_prior[c] == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                self.log_prior[c]
                    - 0.5
                        * x.iter()
                            .zip(&self.mean[c])
                            .zip(&self.var[c])
                            .map(|((v, m), s)| ln_2pi + s.ln() + (v - m).powi(2) / s)
                            .sum::<f64>()
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> (usize, Vec<f64>) {
        let p = softmax(&self.log_joint(x));
        (argmax(&p), p)
    }
}
