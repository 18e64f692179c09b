use serde::{Deserialize, Serialize};

/// Gaussian naive Bayes. Every variance is inflated by
/// `var_smoothing * max column variance` so constant columns stay usable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    /// Index 0 = negative class, 1 = positive class.
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

fn moments(rows: &[&Vec<f64>], d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        for j in 0..d {
            mean[j] += r[j] / n;
        }
    }
    let mut var = vec![0.0; d];
    for r in rows {
        for j in 0..d {
            var[j] += (r[j] - mean[j]).powi(2) / n;
        }
    }
    (mean, var)
}

impl GaussianNb {
    pub(crate) fn fit(x: &[Vec<f64>], y: &[bool], var_smoothing: f64) -> GaussianNb {
        let d = x[0].len();
        let all: Vec<&Vec<f64>> = x.iter().collect();
        let max_var = moments(&all, d).1.into_iter().fold(0.0, f64::max);
        let eps = if max_var > 0.0 { var_smoothing * max_var } else { var_smoothing };

        let class = |c: bool| {
            let rows: Vec<&Vec<f64>> = x.iter().zip(y).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
            let (mean, mut var) = moments(&rows, d);
            var.iter_mut().for_each(|v| *v += eps);
            ((rows.len() as f64 / x.len() as f64).ln(), mean, var)
        };
        let (p0, m0, v0) = class(false);
        let (p1, m1, v1) = class(true);
        GaussianNb {
            log_prior: [p0, p1],
            mean: [m0, m1],
            var: [v0, v1],
        }
    }

    fn log_joint(&self, c: usize, x: &[f64]) -> f64 {
        let ll: f64 = x
            .iter()
            .zip(self.mean[c].iter().zip(&self.var[c]))
            .map(|(v, (m, s2))| -0.5 * ((std::f64::consts::TAU * s2).ln() + (v - m).powi(2) / s2))
            .sum();
        self.log_prior[c] + ll
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let diff = self.log_joint(0, x) - self.log_joint(1, x);
        // P(pos | x) = 1 / (1 + exp(l0 - l1)).
        let s = super::sigmoid(-diff);
        if s.is_nan() {
            0.5
        } else {
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_hand_computed_posterior() {
        let x = vec![vec![0.0], vec![2.0], vec![4.0], vec![6.0]];
        let y = vec![false, false, true, true];
        let nb = GaussianNb::fit(&x, &y, 1e-12);
        // Class means 1 and 5, variances 1 (+tiny), equal priors.
        assert!((nb.mean[0][0] - 1.0).abs() < 1e-12);
        assert!((nb.var[1][0] - 1.0).abs() < 1e-9);
        // At x = 3 both likelihoods are equal.
        assert!((nb.score(&[3.0]) - 0.5).abs() < 1e-9);
        // At x = 4: log ratio = ((4-1)^2 - (4-5)^2) / 2 = 4.
        let expected = 1.0 / (1.0 + (-4.0f64).exp());
        assert!((nb.score(&[4.0]) - expected).abs() < 1e-9);
    }

    #[test]
    fn constant_columns_do_not_break_scoring() {
        let x = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 5.0], vec![1.0, 6.0]];
        let y = vec![false, false, true, true];
        let nb = GaussianNb::fit(&x, &y, 1e-9);
        let s = nb.score(&[1.0, 5.5]);
        assert!(s.is_finite() && s > 0.5);
        assert!(nb.score(&[1e6, -1e6]).is_finite());
    }
}
