//! k-nearest-neighbour classifier on Euclidean distance.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    pub k: usize,
    xs: Vec<Vec<f64>>,
    ys: Vec<u8>,
    n_classes: usize,
}

impl Knn {
    pub fn fit(xs: &[Vec<f64>], ys: &[u8], n_classes: usize, k: usize) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptyTrain);
        }
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: ys.len(),
            });
        }
        if k == 0 {
            return Err(Error::InvalidConfig("k must be positive".into()));
        }
        if ys.iter().any(|&y| y as usize >= n_classes) {
            return Err(Error::DegenerateLabels("label outside the class range"));
        }
        Ok(Self {
            k: k.min(xs.len()),
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            n_classes,
        })
    }

    /// Majority label among the `k` nearest training points (ties broken by
    /// the larger distance-weighted score, then the lower class index) and
    /// per-class scores: inverse-distance weights normalized to sum to 1.
    pub fn predict(&self, x: &[f64]) -> (usize, Vec<f64>) {
        // Sorted (distance, index) list of the k best so far; the index
        // breaks distance ties so results do not depend on scan order.
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(self.k + 1);
        for (i, t) in self.xs.iter().enumerate() {
            let d2: f64 = t.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.len() == self.k && d2 >= best[self.k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(d, _)| d <= d2);
            best.insert(pos, (d2, i));
            best.truncate(self.k);
        }
        let mut votes = vec![0usize; self.n_classes];
        let mut scores = vec![0.0; self.n_classes];
        for &(d2, i) in &best {
            let c = self.ys[i] as usize;
            votes[c] += 1;
            scores[c] += 1.0 / (d2.sqrt() + 1e-12);
        }
        let total: f64 = scores.iter().sum();
        scores.iter_mut().for_each(|s| *s /= total);
        let label = (0..self.n_classes).fold(0, |b, c| {
            if votes[c] > votes[b] || (votes[c] == votes[b] && scores[c] > scores[b]) {
                c
            } else {
                b
            }
        });
        (label, scores)
    }
}
