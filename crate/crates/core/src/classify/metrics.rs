use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub macro_auc: f64,
}

pub fn accuracy(y_true: &[u8], y_pred: &[u8]) -> Result<f64> {
    check(y_true.len(), y_pred.len())?;
    if y_true.is_empty() {
        return Ok(0.0);
    }
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y_true.len() as f64)
}

fn check(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

/// F1 of every class `0..n_classes`; 0 for a class that never occurs in
/// either vector.
pub fn f1_per_class(y_true: &[u8], y_pred: &[u8], n_classes: usize) -> Result<Vec<f64>> {
    check(y_true.len(), y_pred.len())?;
    let mut tp = vec![0usize; n_classes];
    let mut fp = vec![0usize; n_classes];
    let mut fn_ = vec![0usize; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        let (t, p) = (t as usize, p as usize);
        if t >= n_classes || p >= n_classes {
            return Err(Error::DegenerateLabels("label outside the class range"));
        }
        if t == p {
            tp[t] += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }
    Ok((0..n_classes)
        .map(|c| {
            let denom = 2 * tp[c] + fp[c] + fn_[c];
            if denom == 0 {
                0.0
            } else {
                2.0 * tp[c] as f64 / denom as f64
            }
        })
        .collect())
}

pub fn macro_f1(y_true: &[u8], y_pred: &[u8], n_classes: usize) -> Result<f64> {
    let f = f1_per_class(y_true, y_pred, n_classes)?;
    Ok(f.iter().sum::<f64>() / n_classes.max(1) as f64)
}

/// Ranks starting at 1, tied values sharing their mean rank.
pub fn midranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        order[i..=j].iter().for_each(|&k| ranks[k] = r);
        i = j + 1;
    }
    ranks
}

/// ROC AUC of `scores` for the positives marked in `positive`, from the
/// Mann-Whitney statistic. `None` when either side is empty.
pub fn binary_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let ranks = midranks(scores);
    let rank_sum: f64 = ranks.iter().zip(positive).filter(|(_, &p)| p).map(|(r, _)| r).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos * n_neg) as f64)
}

/// Unweighted mean of the one-vs-rest AUCs over classes that have both
/// positives and negatives in `y_true`.
pub fn macro_auc(y_true: &[u8], scores: &[Vec<f64>], n_classes: usize) -> Result<f64> {
    check(y_true.len(), scores.len())?;
    let mut sum = 0.0;
    let mut count = 0;
    for c in 0..n_classes {
        let col: Vec<f64> = scores.iter().map(|s| s[c]).collect();
        let pos: Vec<bool> = y_true.iter().map(|&y| y as usize == c).collect();
        if let Some(a) = binary_auc(&col, &pos) {
            sum += a;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::DegenerateLabels("AUC needs two classes in the test set"));
    }
    Ok(sum / count as f64)
}

pub fn metrics(y_true: &[u8], y_pred: &[u8], scores: &[Vec<f64>], n_classes: usize) -> Result<Metrics> {
    Ok(Metrics {
        accuracy: accuracy(y_true, y_pred)?,
        macro_f1: macro_f1(y_true, y_pred, n_classes)?,
        macro_auc: macro_auc(y_true, scores, n_classes)?,
    })
}
