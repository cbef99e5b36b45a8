//! Multinomial logistic regression trained by minibatch gradient descent.
//!
//! Logits are `l = W s + b`, probabilities their softmax, and the objective
//! is the mean cross-entropy plus `lambda * (||W||^2 + ||b||^2)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SoftmaxConfig {
    pub epochs: usize,
    pub eta: f64,
    pub lambda: f64,
    pub batch_size: usize,
}

impl Default for SoftmaxConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            eta: 0.05,
            lambda: 1e-4,
            batch_size: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxModel {
    /// `n_classes x d`, row-major.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub lambda: f64,
    pub eta: f64,
}

/// Numerically stable softmax; the output sums to 1 up to round-off.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold(0, |best, (i, &x)| if x > v[best] { i } else { best })
}

impl SoftmaxModel {
    pub fn zeros(n_classes: usize, d: usize) -> Self {
        Self {
            weights: vec![vec![0.0; d]; n_classes],
            bias: vec![0.0; n_classes],
            lambda: 0.0,
            eta: 0.0,
        }
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>() + b)
            .collect()
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.logits(x))
    }

    pub fn predict(&self, x: &[f64]) -> (usize, Vec<f64>) {
        let p = self.predict_proba(x);
        (argmax(&p), p)
    }
}

/// Gradient of the objective with respect to the weights and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

/// Objective value and gradient on the samples selected by `idx`.
pub fn loss_and_grad(model: &SoftmaxModel, xs: &[Vec<f64>], ys: &[u8], idx: &[usize], lambda: f64) -> (f64, Gradient) {
    let k = model.weights.len();
    let d = model.weights.first().map_or(0, |w| w.len());
    let mut gw = vec![vec![0.0; d]; k];
    let mut gb = vec![0.0; k];
    let mut loss = 0.0;
    let n = idx.len().max(1) as f64;
    for &i in idx {
        let p = model.predict_proba(&xs[i]);
        let y = ys[i] as usize;
        loss -= p[y].max(f64::MIN_POSITIVE).ln();
        for c in 0..k {
            let err = p[c] - if c == y { 1.0 } else { 0.0 };
            gb[c] += err;
            gw[c].iter_mut().zip(&xs[i]).for_each(|(g, x)| *g += err * x);
        }
    }
    let mut penalty = 0.0;
    for c in 0..k {
        gb[c] = gb[c] / n + 2.0 * lambda * model.bias[c];
        penalty += model.bias[c] * model.bias[c];
        for j in 0..d {
            let w = model.weights[c][j];
            gw[c][j] = gw[c][j] / n + 2.0 * lambda * w;
            penalty += w * w;
        }
    }
    (loss / n + lambda * penalty, Gradient { weights: gw, bias: gb })
}

/// Trains from zero initialization, reshuffling every epoch with a generator
/// seeded by `seed`.
pub fn softmax_train(
    xs: &[Vec<f64>],
    ys: &[u8],
    n_classes: usize,
    cfg: &SoftmaxConfig,
    seed: u64,
) -> Result<SoftmaxModel> {
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
    if ys.iter().all(|&y| y == ys[0]) {
        return Err(Error::DegenerateLabels("training set holds a single class"));
    }
    if cfg.batch_size == 0 || !(cfg.eta > 0.0) || !(cfg.lambda >= 0.0) {
        return Err(Error::InvalidConfig("softmax batch, eta or lambda".into()));
    }
    let d = xs[0].len();
    if xs.iter().any(|x| x.len() != d) {
        return Err(Error::InvalidConfig("inconsistent feature length".into()));
    }
    let mut model = SoftmaxModel {
        lambda: cfg.lambda,
        eta: cfg.eta,
        ..SoftmaxModel::zeros(n_classes, d)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let (_, g) = loss_and_grad(&model, xs, ys, batch, cfg.lambda);
            for c in 0..n_classes {
                model.bias[c] -= cfg.eta * g.bias[c];
                model.weights[c]
                    .iter_mut()
                    .zip(&g.weights[c])
                    .for_each(|(w, gw)| *w -= cfg.eta * gw);
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn softmax_arithmetic() {
        let m = SoftmaxModel::zeros(5, 3);
        let p = m.predict_proba(&[1.0, -2.0, 0.5]);
        assert!(p.iter().all(|&v| (v - 0.2).abs() < 1e-15));
        let p = softmax(&[10.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(p[0] > 0.999);
        let shifted = softmax(&[10.0 + 123.4, 123.4, 123.4, 123.4, 123.4]);
        for (a, b) in p.iter().zip(&shifted) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(argmax(&[0.1, 0.4, 0.4]), 1);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
        let (k, d, n) = (5, 4, 12);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| g()).collect()).collect();
        let ys: Vec<u8> = (0..n).map(|i| (i % k) as u8).collect();
        let idx: Vec<usize> = (0..n).collect();
        let mut m = SoftmaxModel::zeros(k, d);
        m.weights.iter_mut().flatten().for_each(|w| *w = 0.5 * g());
        m.bias.iter_mut().for_each(|b| *b = 0.5 * g());
        let lambda = 0.05;
        let (_, grad) = loss_and_grad(&m, &xs, &ys, &idx, lambda);
        let h = 1e-5;
        for c in 0..k {
            for j in 0..=d {
                let mut plus = m.clone();
                let mut minus = m.clone();
                let analytic = if j < d {
                    plus.weights[c][j] += h;
                    minus.weights[c][j] -= h;
                    grad.weights[c][j]
                } else {
                    plus.bias[c] += h;
                    minus.bias[c] -= h;
                    grad.bias[c]
                };
                let numeric = (loss_and_grad(&plus, &xs, &ys, &idx, lambda).0
                    - loss_and_grad(&minus, &xs, &ys, &idx, lambda).0)
                    / (2.0 * h);
                let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
                assert!(rel < 1e-5, "c={c} j={j}: {analytic} vs {numeric}");
            }
        }
    }

    #[test]
    fn separable_blobs_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..200 {
            let c = (i % 2) as u8;
            let centre = if c == 0 { -3.0 } else { 3.0 };
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            xs.push(vec![centre + a, b]);
            ys.push(c);
        }
        let cfg = SoftmaxConfig {
            epochs: 200,
            ..Default::default()
        };
        let m = softmax_train(&xs, &ys, 2, &cfg, 1).unwrap();
        let correct = xs
            .iter()
            .zip(&ys)
            .filter(|(x, &y)| m.predict(x).0 == y as usize)
            .count();
        assert!(correct as f64 / 200.0 >= 0.99);
    }

    #[test]
    fn heavy_regularization_gives_uniform() {
        let xs: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 / 50.0, 1.0]).collect();
        let ys: Vec<u8> = (0..50).map(|i| (i % 5) as u8).collect();
        let cfg = SoftmaxConfig {
            lambda: 4.0,
            eta: 0.1,
            epochs: 100,
            ..Default::default()
        };
        let m = softmax_train(&xs, &ys, 5, &cfg, 0).unwrap();
        let p = m.predict_proba(&xs[7]);
        assert!(p.iter().all(|v| (v - 0.2).abs() < 5e-3), "{p:?}");
    }

    #[test]
    fn deterministic_and_validates() {
        let xs: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64).sin(), (i as f64).cos()]).collect();
        let ys: Vec<u8> = (0..40).map(|i| (i % 3) as u8).collect();
        let cfg = SoftmaxConfig {
            epochs: 5,
            ..Default::default()
        };
        assert_eq!(
            softmax_train(&xs, &ys, 3, &cfg, 9).unwrap(),
            softmax_train(&xs, &ys, 3, &cfg, 9).unwrap()
        );
        assert!(softmax_train(&xs, &[1; 40], 3, &cfg, 0).is_err());
        assert!(softmax_train(&[], &[], 3, &cfg, 0).is_err());
    }
}
