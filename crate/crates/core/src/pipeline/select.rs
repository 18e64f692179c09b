//! Gain-ratio feature ranking over binary threshold splits.

use serde::{Deserialize, Serialize};

/// IG differences below this are treated as ties.
const TIE: f64 = 1e-12;

/// Entropy in bits of a two-way split with counts `a` and `b`. Symmetric in
/// its arguments bit for bit, so `H(a, b) == H(b, a)`.
pub fn entropy2(a: usize, b: usize) -> f64 {
    let n = (a + b) as f64;
    if a == 0 || b == 0 {
        return 0.0;
    }
    let term = |c: usize| {
        let p = c as f64 / n;
        -p * p.log2()
    };
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    term(lo) + term(hi)
}

/// Gain ratio of the best threshold split of `feature` (split `x <= t`),
/// where "best" maximizes information gain and ties go to the smallest
/// threshold. Constant columns and zero-gain splits score 0.
pub fn gain_ratio(feature: &[f64], y: &[bool]) -> f64 {
    assert_eq!(feature.len(), y.len(), "feature and label lengths differ");
    let n = y.len();
    if n < 2 {
        return 0.0;
    }
    let pos = y.iter().filter(|&&v| v).count();
    let h = entropy2(pos, n - pos);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| feature[a].total_cmp(&feature[b]));

    let mut best: Option<(f64, usize)> = None;
    let mut left_pos = 0;
    for k in 1..n {
        left_pos += y[order[k - 1]] as usize;
        if feature[order[k - 1]] == feature[order[k]] {
            continue;
        }
        let right_pos = pos - left_pos;
        let cond = (k as f64 / n as f64) * entropy2(left_pos, k - left_pos)
            + ((n - k) as f64 / n as f64) * entropy2(right_pos, n - k - right_pos);
        let ig = h - cond;
        if best.map_or(true, |(b, _)| ig > b + TIE) {
            best = Some((ig, k));
        }
    }
    match best {
        Some((ig, k)) if ig > TIE => {
            let split_info = entropy2(k, n - k);
            if split_info > 0.0 {
                ig / split_info
            } else {
                0.0
            }
        }
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Retained column indices, highest gain ratio first.
    pub columns: Vec<usize>,
    /// Gain ratio of every input column, by column index.
    pub ratios: Vec<f64>,
    pub warning: Option<String>,
}

impl Selection {
    pub fn all(d: usize) -> Self {
        Selection {
            columns: (0..d).collect(),
            ratios: Vec::new(),
            warning: None,
        }
    }

    pub fn project(&self, row: &[f64]) -> Vec<f64> {
        self.columns.iter().map(|&c| row[c]).collect()
    }
}

/// Keeps the columns with positive gain ratio. If none qualifies every
/// column is kept and a warning is attached.
pub fn select_features(x: &[Vec<f64>], y: &[bool]) -> Selection {
    let d = x.first().map_or(0, Vec::len);
    let ratios: Vec<f64> = (0..d)
        .map(|j| {
            let col: Vec<f64> = x.iter().map(|r| r[j]).collect();
            gain_ratio(&col, y)
        })
        .collect();
    let mut columns: Vec<usize> = (0..d).filter(|&j| ratios[j] > 0.0).collect();
    columns.sort_by(|&a, &b| ratios[b].total_cmp(&ratios[a]).then(a.cmp(&b)));
    if columns.is_empty() {
        return Selection {
            columns: (0..d).collect(),
            ratios,
            warning: Some("no feature has positive gain ratio; keeping all".into()),
        };
    }
    Selection {
        columns,
        ratios,
        warning: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_copy_scores_one_and_constant_zero() {
        let y = [false, true, true, false, true, false, false];
        let f: Vec<f64> = y.iter().map(|&v| v as u8 as f64).collect();
        assert_eq!(gain_ratio(&f, &y), 1.0);
        assert_eq!(gain_ratio(&[3.0; 7], &y), 0.0);
    }

    #[test]
    fn four_point_example() {
        // Best split 2|3 separates perfectly: IG = 1, split info = 1.
        assert_eq!(gain_ratio(&[1.0, 2.0, 3.0, 4.0], &[false, false, true, true]), 1.0);
    }

    #[test]
    fn selection_examples() {
        let y = vec![false, true, false, true];
        let x: Vec<Vec<f64>> = y.iter().map(|&v| vec![5.0, v as u8 as f64]).collect();
        assert_eq!(select_features(&x, &y).columns, vec![1]);
        let constant = vec![vec![1.0, 2.0]; 4];
        let s = select_features(&constant, &y);
        assert_eq!(s.columns, vec![0, 1]);
        assert!(s.warning.is_some());
    }

    #[test]
    fn selection_orders_by_ratio() {
        let y = vec![false, false, true, true, true, false];
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, y[i] as u8 as f64, (i % 2) as f64]).collect();
        let s = select_features(&x, &y);
        assert_eq!(s.columns[0], 1);
        assert!(s.columns.windows(2).all(|w| s.ratios[w[0]] >= s.ratios[w[1]]));
    }
}
