//! Class balancing by over- and under-sampling.
//!
//! Over-samplers keep every input row in place and append synthetic minority
//! rows; under-samplers return a subset of the majority rows in input order
//! plus every minority row. Distances are Euclidean on the matrix as given,
//! so callers scale first.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{derived_rng, Rng};

pub const SMOTE_K: usize = 5;
pub const NEAR_MISS_K: usize = 3;
const BORDERLINE_M: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Balancing {
    None,
    RandomOver,
    RandomUnder,
    Smote,
    BorderlineSmote,
    Adasyn,
    NearMiss1,
    NearMiss2,
    NearMiss3,
}

impl Balancing {
    pub const ALL: [Balancing; 9] = [
        Balancing::None,
        Balancing::RandomOver,
        Balancing::RandomUnder,
        Balancing::Smote,
        Balancing::BorderlineSmote,
        Balancing::Adasyn,
        Balancing::NearMiss1,
        Balancing::NearMiss2,
        Balancing::NearMiss3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Balancing::None => "none",
            Balancing::RandomOver => "random_over",
            Balancing::RandomUnder => "random_under",
            Balancing::Smote => "smote",
            Balancing::BorderlineSmote => "borderline_smote",
            Balancing::Adasyn => "adasyn",
            Balancing::NearMiss1 => "near_miss1",
            Balancing::NearMiss2 => "near_miss2",
            Balancing::NearMiss3 => "near_miss3",
        }
    }

    pub fn is_smote_family(self) -> bool {
        matches!(self, Balancing::Smote | Balancing::BorderlineSmote | Balancing::Adasyn)
    }

    pub fn is_oversampler(self) -> bool {
        self.is_smote_family() || self == Balancing::RandomOver
    }
}

impl fmt::Display for Balancing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Balancing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Balancing::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown balancing strategy `{s}`")))
    }
}

/// Where each synthetic row came from: `z = rows[base] + lambda * (rows[neighbor] - rows[base])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Synthetic {
    pub base: usize,
    pub neighbor: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Balanced {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<bool>,
    /// Input rows present in the output, in order; they come first.
    pub kept: Vec<usize>,
    /// One entry per appended synthetic row.
    pub synthetic: Vec<Synthetic>,
    pub warnings: Vec<String>,
}

impl Balanced {
    fn subset(x: &[Vec<f64>], y: &[bool], kept: Vec<usize>) -> Balanced {
        Balanced {
            x: kept.iter().map(|&i| x[i].clone()).collect(),
            y: kept.iter().map(|&i| y[i]).collect(),
            kept,
            synthetic: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// Indices of the `k` rows among `pool` nearest to `x[from]`, excluding
/// `from` itself. Ties go to the lower index.
pub fn nearest(x: &[Vec<f64>], from: usize, pool: &[usize], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = pool
        .iter()
        .filter(|&&j| j != from)
        .map(|&j| (distance(&x[from], &x[j]), j))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, j)| j).collect()
}

pub fn balance(x: &[Vec<f64>], y: &[bool], strategy: Balancing, seed: u64) -> Result<Balanced> {
    let k = if strategy.is_smote_family() { SMOTE_K } else { NEAR_MISS_K };
    balance_with_k(x, y, strategy, k, seed)
}

pub fn balance_with_k(x: &[Vec<f64>], y: &[bool], strategy: Balancing, k: usize, seed: u64) -> Result<Balanced> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if strategy == Balancing::None {
        return Ok(Balanced::subset(x, y, (0..x.len()).collect()));
    }
    let pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass);
    }
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    if minority.len() == majority.len() {
        return Ok(Balanced::subset(x, y, (0..x.len()).collect()));
    }
    if strategy.is_smote_family() && minority.len() < k + 1 {
        return Err(Error::MinorityTooSmall {
            minority: minority.len(),
            needed: k + 1,
            k,
        });
    }
    let mut rng = derived_rng(seed, &["balance", strategy.name()]);
    let need = majority.len() - minority.len();
    let s = Sets {
        x,
        minority: &minority,
        majority: &majority,
        k,
    };
    match strategy {
        Balancing::None => unreachable!(),
        Balancing::RandomOver => {
            let picks: Vec<usize> = (0..need).map(|_| minority[rng.gen_range(0..minority.len())]).collect();
            let synthetic = picks
                .into_iter()
                .map(|b| Synthetic {
                    base: b,
                    neighbor: b,
                    lambda: 0.0,
                })
                .collect();
            Ok(oversampled(x, y, synthetic, Vec::new()))
        }
        Balancing::RandomUnder => {
            let mut keep: Vec<usize> = sample(&mut rng, majority.len(), minority.len())
                .into_iter()
                .map(|i| majority[i])
                .chain(minority.iter().copied())
                .collect();
            keep.sort_unstable();
            Ok(Balanced::subset(x, y, keep))
        }
        Balancing::Smote => {
            let seeds = vec![1.0; minority.len()];
            Ok(oversampled(x, y, s.interpolate(&seeds, need, &mut rng), Vec::new()))
        }
        Balancing::BorderlineSmote => {
            let all: Vec<usize> = (0..x.len()).collect();
            let m = BORDERLINE_M.min(x.len() - 1);
            let weights: Vec<f64> = minority
                .iter()
                .map(|&i| {
                    let nb = nearest(x, i, &all, m);
                    let frac = s.majority_fraction(&nb);
                    if (0.5..1.0).contains(&frac) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            let mut warnings = Vec::new();
            let weights = if weights.iter().all(|&w| w == 0.0) {
                warnings.push("borderline-SMOTE found no danger points; fell back to SMOTE".into());
                vec![1.0; minority.len()]
            } else {
                weights
            };
            Ok(oversampled(x, y, s.interpolate(&weights, need, &mut rng), warnings))
        }
        Balancing::Adasyn => {
            let all: Vec<usize> = (0..x.len()).collect();
            let ratios: Vec<f64> = minority
                .iter()
                .map(|&i| s.majority_fraction(&nearest(x, i, &all, k)))
                .collect();
            let mut warnings = Vec::new();
            let ratios = if ratios.iter().sum::<f64>() == 0.0 {
                warnings.push("ADASYN found no hard minority points; allocating uniformly".into());
                vec![1.0; minority.len()]
            } else {
                ratios
            };
            let counts = allocate(&ratios, need);
            let mut synthetic = Vec::with_capacity(need);
            for (slot, &c) in counts.iter().enumerate() {
                let base = minority[slot];
                let nbs = nearest(x, base, &minority, k);
                for _ in 0..c {
                    synthetic.push(Synthetic {
                        base,
                        neighbor: nbs[rng.gen_range(0..nbs.len())],
                        lambda: rng.gen(),
                    });
                }
            }
            Ok(oversampled(x, y, synthetic, warnings))
        }
        Balancing::NearMiss1 => Ok(s.near_miss_by(y, |d| d.iter().take(k).sum::<f64>() / k.min(d.len()) as f64, Ordering::Less)),
        Balancing::NearMiss2 => Ok(s.near_miss_by(y, |d| d.iter().rev().take(k).sum::<f64>() / k.min(d.len()) as f64, Ordering::Less)),
        Balancing::NearMiss3 => Ok(s.near_miss3(y)),
    }
}

struct Sets<'a> {
    x: &'a [Vec<f64>],
    minority: &'a [usize],
    majority: &'a [usize],
    k: usize,
}

impl Sets<'_> {
    fn majority_fraction(&self, neighbors: &[usize]) -> f64 {
        if neighbors.is_empty() {
            return 0.0;
        }
        neighbors.iter().filter(|j| self.majority.contains(j)).count() as f64 / neighbors.len() as f64
    }

    /// SMOTE interpolation with base points drawn with probability
    /// proportional to `weights` (indexed like `minority`).
    fn interpolate(&self, weights: &[f64], need: usize, rng: &mut Rng) -> Vec<Synthetic> {
        let eligible: Vec<usize> = (0..self.minority.len()).filter(|&i| weights[i] > 0.0).collect();
        let neighbors: Vec<Vec<usize>> = self
            .minority
            .iter()
            .map(|&i| nearest(self.x, i, self.minority, self.k))
            .collect();
        (0..need)
            .map(|_| {
                let slot = eligible[rng.gen_range(0..eligible.len())];
                let nbs = &neighbors[slot];
                Synthetic {
                    base: self.minority[slot],
                    neighbor: nbs[rng.gen_range(0..nbs.len())],
                    lambda: rng.gen(),
                }
            })
            .collect()
    }

    /// Keeps the `minority.len()` majority rows with the best statistic over
    /// their sorted distances to all minority rows.
    fn near_miss_by(&self, y: &[bool], stat: impl Fn(&[f64]) -> f64, prefer: Ordering) -> Balanced {
        let scored: Vec<(f64, usize)> = self
            .majority
            .iter()
            .map(|&j| (stat(&self.sorted_distances(j, self.minority)), j))
            .collect();
        self.keep_best(y, scored, prefer)
    }

    fn sorted_distances(&self, from: usize, pool: &[usize]) -> Vec<f64> {
        let mut d: Vec<f64> = pool.iter().map(|&i| distance(&self.x[from], &self.x[i])).collect();
        d.sort_by(f64::total_cmp);
        d
    }

    fn keep_best(&self, y: &[bool], mut scored: Vec<(f64, usize)>, prefer: Ordering) -> Balanced {
        scored.sort_by(|a, b| {
            let by_stat = if prefer == Ordering::Less { a.0.total_cmp(&b.0) } else { b.0.total_cmp(&a.0) };
            by_stat.then(a.1.cmp(&b.1))
        });
        let mut keep: Vec<usize> = scored
            .into_iter()
            .take(self.minority.len())
            .map(|(_, j)| j)
            .chain(self.minority.iter().copied())
            .collect();
        keep.sort_unstable();
        Balanced::subset(self.x, y, keep)
    }

    /// Preselects, for every minority row, its `m` nearest majority rows
    /// (m starts at k and grows until enough candidates exist), then keeps
    /// the candidates whose mean distance to their k nearest minority rows
    /// is largest.
    fn near_miss3(&self, y: &[bool]) -> Balanced {
        let target = self.minority.len();
        let mut m = self.k.max(1);
        let candidates = loop {
            let mut c: Vec<usize> = self
                .minority
                .iter()
                .flat_map(|&i| nearest(self.x, i, self.majority, m))
                .collect();
            c.sort_unstable();
            c.dedup();
            if c.len() >= target || m >= self.majority.len() {
                break c;
            }
            m += 1;
        };
        let k = self.k;
        let scored: Vec<(f64, usize)> = candidates
            .into_iter()
            .map(|j| {
                let d = self.sorted_distances(j, self.minority);
                (d.iter().take(k).sum::<f64>() / k.min(d.len()) as f64, j)
            })
            .collect();
        let mut out = self.keep_best(y, scored, Ordering::Greater);
        if m > self.k.max(1) {
            out.warnings.push(format!("NearMiss-3 widened its preselection to {m} neighbours"));
        }
        out
    }
}

fn oversampled(x: &[Vec<f64>], y: &[bool], synthetic: Vec<Synthetic>, warnings: Vec<String>) -> Balanced {
    let mut bx = x.to_vec();
    let mut by = y.to_vec();
    for s in &synthetic {
        let (a, b) = (&x[s.base], &x[s.neighbor]);
        bx.push(a.iter().zip(b).map(|(p, q)| p + s.lambda * (q - p)).collect());
        by.push(y[s.base]);
    }
    Balanced {
        x: bx,
        y: by,
        kept: (0..x.len()).collect(),
        synthetic,
        warnings,
    }
}

/// Splits `total` proportionally to `weights` by largest remainder; ties go
/// to the earlier slot.
fn allocate(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Per-column min-max scaling to [0, 1]; constant columns map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for r in x {
            for j in 0..d {
                min[j] = min[j].min(r[j]);
                max[j] = max[j].max(r[j]);
            }
        }
        MinMaxScaler { min, max }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, v)| {
                let span = self.max[j] - self.min[j];
                if span > 0.0 {
                    (v - self.min[j]) / span
                } else {
                    0.0
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng;

    fn imbalanced(maj: usize, min: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut r = rng(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..maj + min {
            let pos = i >= maj;
            let c = if pos { 1.0 } else { 0.0 };
            x.push(vec![c + r.gen_range(-0.8..0.8), r.gen_range(0.0..1.0)]);
            y.push(pos);
        }
        (x, y)
    }

    fn counts(y: &[bool]) -> (usize, usize) {
        let p = y.iter().filter(|&&v| v).count();
        (y.len() - p, p)
    }

    #[test]
    fn every_strategy_equalizes() {
        let (x, y) = imbalanced(100, 10, 1);
        for s in Balancing::ALL.into_iter().skip(1) {
            let b = balance(&x, &y, s, 3).unwrap();
            let (n, p) = counts(&b.y);
            assert_eq!(n, p, "{s}");
            if s.is_oversampler() {
                assert_eq!(p, 100);
                assert_eq!(&b.x[..110], &x[..]);
            } else {
                assert_eq!(p, 10);
                for (row, &i) in b.x.iter().zip(&b.kept) {
                    assert_eq!(row, &x[i]);
                }
            }
        }
    }

    #[test]
    fn smote_rows_lie_on_neighbor_segments() {
        let (x, y) = imbalanced(60, 12, 2);
        let minority: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
        for s in [Balancing::Smote, Balancing::BorderlineSmote, Balancing::Adasyn] {
            let b = balance(&x, &y, s, 9).unwrap();
            for (row, syn) in b.x[x.len()..].iter().zip(&b.synthetic) {
                assert!(nearest(&x, syn.base, &minority, SMOTE_K).contains(&syn.neighbor));
                assert!((0.0..=1.0).contains(&syn.lambda));
                for j in 0..row.len() {
                    let expect = x[syn.base][j] + syn.lambda * (x[syn.neighbor][j] - x[syn.base][j]);
                    assert!((row[j] - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn errors_on_degenerate_input() {
        let (x, y) = imbalanced(20, 4, 3);
        assert!(matches!(
            balance(&x, &y, Balancing::Smote, 0),
            Err(Error::MinorityTooSmall { minority: 4, needed: 6, k: 5 })
        ));
        assert!(balance_with_k(&x, &y, Balancing::Smote, 3, 0).is_ok());
        let single = vec![true; 24];
        assert!(matches!(balance(&x, &single, Balancing::RandomUnder, 0), Err(Error::SingleClass)));
    }

    #[test]
    fn near_miss_one_keeps_closest_majority() {
        let x = vec![vec![0.0], vec![1.0], vec![5.0], vec![9.0], vec![0.5]];
        let y = vec![false, false, false, false, true];
        let b = balance_with_k(&x, &y, Balancing::NearMiss1, 1, 0).unwrap();
        assert_eq!(b.kept, vec![0, 4]);
        let b = balance_with_k(&x, &y, Balancing::NearMiss3, 1, 0).unwrap();
        assert_eq!(b.kept.len(), 2);
    }

    #[test]
    fn allocation_sums_to_total() {
        assert_eq!(allocate(&[1.0, 1.0, 2.0], 5), vec![1, 1, 3]);
        assert_eq!(allocate(&[0.0, 3.0], 4), vec![0, 4]);
    }

    #[test]
    fn names_round_trip() {
        for b in Balancing::ALL {
            assert_eq!(b.name().parse::<Balancing>().unwrap(), b);
        }
    }

    #[test]
    fn scaler_maps_training_range_to_unit_interval() {
        let s = MinMaxScaler::fit(&[vec![1.0, 5.0], vec![3.0, 5.0]]);
        assert_eq!(s.apply(&[2.0, 5.0]), vec![0.5, 0.0]);
        assert_eq!(s.apply(&[5.0, 1.0]), vec![2.0, 0.0]);
    }
}
