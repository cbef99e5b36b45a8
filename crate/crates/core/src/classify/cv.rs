use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Stratified k-fold split. Returns the test indices of each fold, each list
/// ascending.
///
/// Indices of every class are shuffled and dealt round-robin to the folds;
/// the dealing position carries over from one class to the next, so fold
/// sizes differ by at most one and per-class counts by at most one.
pub fn stratified_kfold(labels: &[u8], n_splits: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if n_splits < 2 {
        return Err(Error::InvalidConfig(format!("n_splits {n_splits} below 2")));
    }
    let mut classes: Vec<u8> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); n_splits];
    let mut offset = 0;
    for &c in &classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if idx.len() < n_splits {
            return Err(Error::ClassTooSmall {
                label: c,
                count: idx.len(),
                splits: n_splits,
            });
        }
        idx.shuffle(&mut rng);
        for (j, i) in idx.into_iter().enumerate() {
            folds[(offset + j) % n_splits].push(i);
        }
        offset = (offset + labels.iter().filter(|&&l| l == c).count()) % n_splits;
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// Indices not in `test`, ascending.
pub fn complement(n: usize, test: &[usize]) -> Vec<usize> {
    let mut mask = vec![true; n];
    test.iter().for_each(|&i| mask[i] = false);
    (0..n).filter(|&i| mask[i]).collect()
}
