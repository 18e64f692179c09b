//! CART trees (weighted Gini, threshold splits) and the two ensembles
//! built on them.

use rand::seq::index::sample;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sigmoid;
use crate::seed::{derive_seed, rng, Rng};

pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features examined per split; equal to d for a plain tree.
    pub max_features: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        score: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Nodes are stored in preorder; index 0 is the root. `x[feature] <= threshold`
/// goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

// Gini impurity scaled by node weight: W * 2p(1-p).
fn weighted_gini(pos: f64, total: f64) -> f64 {
    if total <= 0.0 {
        0.0
    } else {
        2.0 * pos * (total - pos) / total
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    w: &'a [f64],
    params: &'a TreeParams,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn build(&mut self, idx: Vec<usize>, depth: usize, rng: &mut Rng) -> usize {
        let id = self.nodes.len();
        let total: f64 = idx.iter().map(|&i| self.w[i]).sum();
        let pos: f64 = idx.iter().filter(|&&i| self.y[i]).map(|&i| self.w[i]).sum();
        let score = if total > 0.0 { pos / total } else { 0.5 };
        self.nodes.push(Node::Leaf { score });

        let min_leaf = self.params.min_samples_leaf;
        if depth >= self.params.max_depth || pos <= 0.0 || pos >= total || idx.len() < 2 * min_leaf {
            return id;
        }
        let d = self.x[0].len();
        let features: Vec<usize> = if self.params.max_features >= d {
            (0..d).collect()
        } else {
            let mut f = sample(rng, d, self.params.max_features).into_vec();
            f.sort_unstable();
            f
        };

        let parent = weighted_gini(pos, total);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = idx.clone();
        for &f in &features {
            sorted.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let (mut wl, mut pl) = (0.0, 0.0);
            for k in 1..sorted.len() {
                let i = sorted[k - 1];
                wl += self.w[i];
                if self.y[i] {
                    pl += self.w[i];
                }
                let (lo, hi) = (self.x[i][f], self.x[sorted[k]][f]);
                if k < min_leaf || sorted.len() - k < min_leaf || lo >= hi {
                    continue;
                }
                let gain = parent - weighted_gini(pl, wl) - weighted_gini(pos - pl, total - wl);
                if best.map_or(true, |(g, _, _)| gain > g) {
                    best = Some((gain, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        let Some((gain, feature, threshold)) = best else {
            return id;
        };
        if gain <= 1e-12 * total {
            return id;
        }
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

impl Tree {
    pub(crate) fn fit(x: &[Vec<f64>], y: &[bool], weights: Option<&[f64]>, params: &TreeParams, rng: &mut Rng) -> Tree {
        Self::fit_rows(x, y, weights, (0..x.len()).collect(), params, rng)
    }

    fn fit_rows(
        x: &[Vec<f64>],
        y: &[bool],
        weights: Option<&[f64]>,
        rows: Vec<usize>,
        params: &TreeParams,
        rng: &mut Rng,
    ) -> Tree {
        let uniform;
        let w = match weights {
            Some(w) => w,
            None => {
                uniform = vec![1.0; x.len()];
                &uniform
            }
        };
        let mut b = Builder {
            x,
            y,
            w,
            params,
            nodes: Vec::new(),
        };
        b.build(rows, 0, rng);
        Tree { nodes: b.nodes }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { score } => return *score,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, at: usize) -> usize {
            match &t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }
}

/// Bagged trees with per-split feature subsampling; the score is the mean
/// leaf score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    pub(crate) fn fit(
        x: &[Vec<f64>],
        y: &[bool],
        n_trees: usize,
        params: &TreeParams,
        bootstrap: bool,
        seed: u64,
    ) -> Forest {
        let n = x.len();
        let trees = (0..n_trees)
            .into_par_iter()
            .map(|t| {
                let mut r = rng(derive_seed(seed, &["forest-tree", &t.to_string()]));
                let rows: Vec<usize> = if bootstrap {
                    (0..n).map(|_| r.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                Tree::fit_rows(x, y, None, rows, params, &mut r)
            })
            .collect();
        Forest { trees }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.score(x)).sum::<f64>() / self.trees.len() as f64
    }
}

/// Discrete AdaBoost over depth-1 stumps; score = sigmoid(2F) where F is the
/// weighted vote in {-1, +1} units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub stumps: Vec<(Tree, f64)>,
}

impl AdaBoost {
    pub(crate) fn fit(x: &[Vec<f64>], y: &[bool], rounds: usize, rng: &mut Rng) -> AdaBoost {
        let n = x.len();
        let params = TreeParams {
            max_depth: 1,
            min_samples_leaf: 1,
            max_features: x[0].len(),
        };
        let sign = |b: bool| if b { 1.0 } else { -1.0 };
        let mut w = vec![1.0 / n as f64; n];
        let mut stumps = Vec::new();
        for _ in 0..rounds {
            let stump = Tree::fit(x, y, Some(&w), &params, rng);
            let h: Vec<bool> = x.iter().map(|xi| stump.score(xi) >= 0.5).collect();
            let total: f64 = w.iter().sum();
            let err = h.iter().zip(y).zip(&w).filter(|((h, y), _)| h != y).map(|(_, w)| w).sum::<f64>() / total;
            if err >= 0.5 - 1e-12 {
                break;
            }
            let err = err.max(1e-10);
            let alpha = 0.5 * ((1.0 - err) / err).ln();
            stumps.push((stump, alpha));
            if err <= 1e-10 {
                break;
            }
            for i in 0..n {
                w[i] *= (-alpha * sign(y[i]) * sign(h[i])).exp();
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
        }
        AdaBoost { stumps }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let f: f64 = self
            .stumps
            .iter()
            .map(|(s, a)| if s.score(x) >= 0.5 { *a } else { -*a })
            .sum();
        sigmoid(2.0 * f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(depth: usize) -> TreeParams {
        TreeParams {
            max_depth: depth,
            min_samples_leaf: 1,
            max_features: 2,
        }
    }

    #[test]
    fn learns_xor_with_depth_two() {
        let x = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.1, 0.0], vec![0.0, 0.9]];
        let y = vec![false, true, true, false, false, true];
        let t = Tree::fit(&x, &y, None, &params(4), &mut rng(0));
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(t.score(xi) >= 0.5, *yi);
        }
    }

    #[test]
    fn depth_is_capped_and_threshold_is_midpoint() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 0.0]).collect();
        let y: Vec<bool> = (0..10).map(|i| i >= 4).collect();
        let t = Tree::fit(&x, &y, None, &params(1), &mut rng(0));
        assert_eq!(t.depth(), 1);
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, threshold, .. } if threshold == 3.5));
    }

    #[test]
    fn weights_shift_the_leaf_score() {
        let x = vec![vec![0.0], vec![0.0], vec![0.0]];
        let y = vec![true, false, false];
        let p = TreeParams {
            max_depth: 3,
            min_samples_leaf: 1,
            max_features: 1,
        };
        let t = Tree::fit(&x, &y, Some(&[2.0, 1.0, 1.0]), &p, &mut rng(0));
        assert_eq!(t.nodes, vec![Node::Leaf { score: 0.5 }]);
    }

    #[test]
    fn adaboost_handles_a_threshold_problem() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y: Vec<bool> = (0..20).map(|i| i % 5 != 0).collect();
        let b = AdaBoost::fit(&x, &y, 30, &mut rng(0));
        assert!(!b.stumps.is_empty());
        let correct = x.iter().zip(&y).filter(|(xi, yi)| (b.score(xi) >= 0.5) == **yi).count();
        assert!(correct >= 16);
    }
}
