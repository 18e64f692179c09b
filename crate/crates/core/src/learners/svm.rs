use serde::{Deserialize, Serialize};

use super::{sigmoid, Standardizer};

/// Linear SVM on standardized inputs, trained by full-batch subgradient
/// descent on `lambda/2 |w|^2 + mean hinge` with `lambda = 1 / c`. The bias
/// is unregularized. The returned iterate is the one with the lowest
/// objective seen. Scores are the logistic of the margin: monotone, not
/// calibrated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub scaler: Standardizer,
    pub w: Vec<f64>,
    pub b: f64,
}

fn objective(z: &[Vec<f64>], t: &[f64], w: &[f64], b: f64, lambda: f64) -> f64 {
    let hinge: f64 = z
        .iter()
        .zip(t)
        .map(|(zi, ti)| (1.0 - ti * (dot(w, zi) + b)).max(0.0))
        .sum::<f64>()
        / z.len() as f64;
    0.5 * lambda * dot(w, w) + hinge
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LinearSvm {
    pub(crate) fn fit(x: &[Vec<f64>], y: &[bool], c: f64, epochs: usize) -> LinearSvm {
        let scaler = Standardizer::fit(x);
        let z: Vec<Vec<f64>> = x.iter().map(|r| scaler.apply(r)).collect();
        let t: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
        let (n, d) = (z.len() as f64, z[0].len());
        let lambda = 1.0 / c;

        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut best = (objective(&z, &t, &w, b, lambda), w.clone(), b);
        for step in 1..=epochs {
            let mut gw: Vec<f64> = w.iter().map(|v| lambda * v).collect();
            let mut gb = 0.0;
            for (zi, ti) in z.iter().zip(&t) {
                if ti * (dot(&w, zi) + b) < 1.0 {
                    for j in 0..d {
                        gw[j] -= ti * zi[j] / n;
                    }
                    gb -= ti / n;
                }
            }
            // Keeps eta * lambda <= 1 so the shrinkage never overshoots.
            let eta = 1.0 / ((lambda + 1.0) * (step as f64).sqrt());
            for j in 0..d {
                w[j] -= eta * gw[j];
            }
            b -= eta * gb;
            let obj = objective(&z, &t, &w, b, lambda);
            if obj < best.0 {
                best = (obj, w.clone(), b);
            }
        }
        LinearSvm {
            scaler,
            w: best.1,
            b: best.2,
        }
    }

    pub fn margin(&self, x: &[f64]) -> f64 {
        dot(&self.w, &self.scaler.apply(x)) + self.b
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_decreases_from_zero_start() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let y: Vec<bool> = (0..40).map(|i| i >= 20).collect();
        let svm = LinearSvm::fit(&x, &y, 1.0, 200);
        let z: Vec<Vec<f64>> = x.iter().map(|r| svm.scaler.apply(r)).collect();
        let t: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
        assert!(objective(&z, &t, &svm.w, svm.b, 1.0) < objective(&z, &t, &[0.0, 0.0], 0.0, 1.0));
        assert!(svm.w[0] > 0.0);
    }

    #[test]
    fn score_is_monotone_in_margin() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<bool> = (0..10).map(|i| i >= 5).collect();
        let svm = LinearSvm::fit(&x, &y, 10.0, 100);
        let scores: Vec<f64> = (0..10).map(|i| svm.score(&[i as f64])).collect();
        assert!(scores.windows(2).all(|p| p[0] <= p[1]));
    }
}
