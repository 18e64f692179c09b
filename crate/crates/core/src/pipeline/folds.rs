use rand::seq::SliceRandom;

use crate::seed::rng;

/// Stratified k-fold partition. Each class is shuffled with `seed`, then
/// dealt round-robin; negatives continue where the positives stopped so
/// fold sizes differ by at most one. Returns sorted test indices per fold.
pub fn stratified_folds(y: &[bool], k: usize, seed: u64) -> Vec<Vec<usize>> {
    assert!(k >= 1, "fold count must be positive");
    let mut r = rng(seed);
    let mut pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let mut neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    pos.shuffle(&mut r);
    neg.shuffle(&mut r);
    let mut folds = vec![Vec::new(); k];
    for (slot, i) in pos.iter().chain(&neg).enumerate() {
        folds[slot % k].push(*i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}

/// Complement of `test` within `0..n`.
pub fn training_rows(n: usize, test: &[usize]) -> Vec<usize> {
    let mut mask = vec![true; n];
    for &i in test {
        mask[i] = false;
    }
    (0..n).filter(|&i| mask[i]).collect()
}
