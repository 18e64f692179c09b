use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{sigmoid, Standardizer};
use crate::seed::Rng;

pub(crate) struct MlpParams {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub epochs: usize,
}

/// One ReLU hidden layer and a logistic output, trained with full-batch
/// Adam on mean binary cross-entropy over standardized inputs.
///
/// `params` layout: hidden weights row-major (`hidden x d`), hidden biases,
/// output weights, output bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub scaler: Standardizer,
    pub inputs: usize,
    pub hidden: usize,
    pub params: Vec<f64>,
}

struct Layout {
    d: usize,
    h: usize,
}

impl Layout {
    fn len(&self) -> usize {
        self.h * self.d + 2 * self.h + 1
    }
    fn b1(&self) -> usize {
        self.h * self.d
    }
    fn w2(&self) -> usize {
        self.b1() + self.h
    }
    fn b2(&self) -> usize {
        self.w2() + self.h
    }
}

fn forward(p: &[f64], l: &Layout, z: &[f64], hidden: &mut [f64]) -> f64 {
    let (w1, rest) = p.split_at(l.b1());
    let (b1, rest) = rest.split_at(l.h);
    let (w2, b2) = rest.split_at(l.h);
    let mut out = b2[0];
    for (((row, b), hk), w) in w1.chunks_exact(l.d).zip(b1).zip(hidden.iter_mut()).zip(w2) {
        let a = row.iter().zip(z).map(|(w, v)| w * v).sum::<f64>() + b;
        *hk = a.max(0.0);
        out += w * *hk;
    }
    out
}

fn softplus(o: f64) -> f64 {
    o.max(0.0) + (-o.abs()).exp().ln_1p()
}

/// Mean cross-entropy and its gradient with respect to `p`.
pub(crate) fn loss_and_grad(p: &[f64], d: usize, h: usize, z: &[Vec<f64>], y: &[bool]) -> (f64, Vec<f64>) {
    let l = Layout { d, h };
    let n = z.len() as f64;
    let mut grad = vec![0.0; l.len()];
    let mut hidden = vec![0.0; h];
    let mut loss = 0.0;
    for (zi, &yi) in z.iter().zip(y) {
        let o = forward(p, &l, zi, &mut hidden);
        let t = if yi { 1.0 } else { 0.0 };
        loss += (softplus(o) - t * o) / n;
        let g = (sigmoid(o) - t) / n;
        grad[l.b2()] += g;
        let (gw1, rest) = grad.split_at_mut(l.b1());
        let (gb1, gw2) = rest.split_at_mut(h);
        let w2 = &p[l.w2()..l.b2()];
        for k in 0..h {
            gw2[k] += g * hidden[k];
            if hidden[k] > 0.0 {
                let gk = g * w2[k];
                gb1[k] += gk;
                for (gw, v) in gw1[k * d..(k + 1) * d].iter_mut().zip(zi) {
                    *gw += gk * v;
                }
            }
        }
    }
    (loss, grad)
}

impl Mlp {
    pub(crate) fn fit(x: &[Vec<f64>], y: &[bool], hp: &MlpParams, rng: &mut Rng) -> Mlp {
        let scaler = Standardizer::fit(x);
        let z: Vec<Vec<f64>> = x.iter().map(|r| scaler.apply(r)).collect();
        let (d, h) = (x[0].len(), hp.hidden_units);
        let l = Layout { d, h };
        let mut p = vec![0.0; l.len()];
        let a1 = (6.0 / d as f64).sqrt();
        let a2 = (6.0 / (h + 1) as f64).sqrt();
        for v in &mut p[..l.b1()] {
            *v = rng.gen_range(-a1..a1);
        }
        for v in &mut p[l.w2()..l.b2()] {
            *v = rng.gen_range(-a2..a2);
        }

        let (beta1, beta2, eps) = (0.9, 0.999, 1e-8);
        let mut m = vec![0.0; p.len()];
        let mut v = vec![0.0; p.len()];
        for t in 1..=hp.epochs {
            let (_, g) = loss_and_grad(&p, d, h, &z, y);
            let c1 = 1.0 - decay_pow(beta1, t);
            let c2 = 1.0 - decay_pow(beta2, t);
            for i in 0..p.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                p[i] -= hp.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
            }
        }
        Mlp {
            scaler,
            inputs: d,
            hidden: h,
            params: p,
        }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let l = Layout {
            d: self.inputs,
            h: self.hidden,
        };
        let mut hidden = vec![0.0; self.hidden];
        sigmoid(forward(&self.params, &l, &self.scaler.apply(x), &mut hidden))
    }
}

fn decay_pow(beta: f64, t: usize) -> f64 {
    beta.powi(t.min(i32::MAX as usize) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng;

    #[test]
    fn gradient_matches_central_differences() {
        let (d, h) = (3, 4);
        let mut r = rng(17);
        let z: Vec<Vec<f64>> = (0..5).map(|_| (0..d).map(|_| r.gen_range(-2.0..2.0)).collect()).collect();
        let y = vec![true, false, true, true, false];
        let p: Vec<f64> = (0..Layout { d, h }.len()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let (_, g) = loss_and_grad(&p, d, h, &z, &y);
        let step = 1e-6;
        for i in 0..p.len() {
            let mut plus = p.clone();
            plus[i] += step;
            let mut minus = p.clone();
            minus[i] -= step;
            let numeric = (loss_and_grad(&plus, d, h, &z, &y).0 - loss_and_grad(&minus, d, h, &z, &y).0) / (2.0 * step);
            let denom = g[i].abs().max(numeric.abs()).max(1e-8);
            assert!((g[i] - numeric).abs() / denom < 1e-4, "param {i}: {} vs {numeric}", g[i]);
        }
    }

    #[test]
    fn training_lowers_the_loss() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
        let y: Vec<bool> = (0..30).map(|i| i >= 15).collect();
        let hp = MlpParams {
            hidden_units: 8,
            learning_rate: 0.05,
            epochs: 200,
        };
        let mlp = Mlp::fit(&x, &y, &hp, &mut rng(1));
        let z: Vec<Vec<f64>> = x.iter().map(|r| mlp.scaler.apply(r)).collect();
        let (loss, _) = loss_and_grad(&mlp.params, 2, 8, &z, &y);
        assert!(loss < 0.2, "{loss}");
    }
}
