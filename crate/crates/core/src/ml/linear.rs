//! Linear learners on standardized features: multinomial logistic
//! regression (full-batch gradient descent) and a one-vs-rest hinge-loss
//! SVM (stochastic subgradient descent).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::flatfile::{FlatReader, FlatWriter};
use crate::{Error, Result};

/// Per-feature affine map to zero mean, unit variance. Constant features
/// keep unit scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Standardizer {
        let d = x[0].len();
        let n = x.len() as f64;
        let mut mean = vec![0.0; d];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; d];
        for row in x {
            for j in 0..d {
                scale[j] += (row[j] - mean[j]).powi(2) / n;
            }
        }
        for s in &mut scale {
            *s = if *s > 1e-24 { s.sqrt() } else { 1.0 };
        }
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub(crate) fn write(&self, w: &mut FlatWriter) {
        w.block("mean", &self.mean).block("scale", &self.scale);
    }

    pub(crate) fn read(r: &mut FlatReader, d: usize) -> Result<Standardizer> {
        let mean = r.block("mean")?;
        let scale = r.block("scale")?;
        if mean.len() != d || scale.len() != d || scale.iter().any(|s| s.is_nan() || *s <= 0.0) {
            return Err(Error::InvalidModel("bad standardizer".into()));
        }
        Ok(Standardizer { mean, scale })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub scaler: Standardizer,
    /// Row-major `n_classes x d`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearModel {
    fn zeros(scaler: Standardizer, c: usize) -> LinearModel {
        let d = scaler.mean.len();
        LinearModel {
            scaler,
            weights: vec![0.0; c * d],
            bias: vec![0.0; c],
        }
    }

    fn dim(&self) -> usize {
        self.scaler.mean.len()
    }

    fn raw_scores(&self, z: &[f64]) -> Vec<f64> {
        let d = self.dim();
        self.bias
            .iter()
            .enumerate()
            .map(|(c, b)| {
                b + self.weights[c * d..(c + 1) * d]
                    .iter()
                    .zip(z)
                    .map(|(w, v)| w * v)
                    .sum::<f64>()
            })
            .collect()
    }

    /// Class margins `w_c . z + b_c` on standardized input.
    pub fn margins(&self, x: &[f64]) -> Vec<f64> {
        self.raw_scores(&self.scaler.apply(x))
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.margins(x))
    }

    pub(crate) fn write(&self, w: &mut FlatWriter) {
        self.scaler.write(w);
        w.block("weights", &self.weights).block("bias", &self.bias);
    }

    pub(crate) fn read(r: &mut FlatReader, c: usize, d: usize) -> Result<LinearModel> {
        let scaler = Standardizer::read(r, d)?;
        let weights = r.block("weights")?;
        let bias = r.block("bias")?;
        if weights.len() != c * d || bias.len() != c {
            return Err(Error::InvalidModel("bad linear weights".into()));
        }
        Ok(LinearModel {
            scaler,
            weights,
            bias,
        })
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Multinomial logistic regression by full-batch gradient descent on the
/// mean cross-entropy plus `l2/2 * |W|^2`.
pub fn fit_logistic(
    x: &[Vec<f64>],
    y: &[usize],
    c: usize,
    learning_rate: f64,
    epochs: usize,
    l2: f64,
) -> LinearModel {
    let scaler = Standardizer::fit(x);
    let z: Vec<Vec<f64>> = x.iter().map(|r| scaler.apply(r)).collect();
    let mut m = LinearModel::zeros(scaler, c);
    let d = m.dim();
    let n = z.len() as f64;
    for _ in 0..epochs {
        let mut gw = vec![0.0; c * d];
        let mut gb = vec![0.0; c];
        for (zi, &yi) in z.iter().zip(y) {
            let p = softmax(&m.raw_scores(zi));
            for k in 0..c {
                let err = (p[k] - if k == yi { 1.0 } else { 0.0 }) / n;
                gb[k] += err;
                for j in 0..d {
                    gw[k * d + j] += err * zi[j];
                }
            }
        }
        for (w, g) in m.weights.iter_mut().zip(&gw) {
            *w -= learning_rate * (g + l2 * *w);
        }
        for (b, g) in m.bias.iter_mut().zip(&gb) {
            *b -= learning_rate * g;
        }
    }
    m
}

/// One-vs-rest linear SVM: per class, stochastic subgradient descent on
/// `l2/2 * |w|^2 + mean hinge(1 - t (w . z + b))` with a seeded sample order.
pub fn fit_svm(
    x: &[Vec<f64>],
    y: &[usize],
    c: usize,
    learning_rate: f64,
    epochs: usize,
    l2: f64,
    seed: u64,
) -> LinearModel {
    let scaler = Standardizer::fit(x);
    let z: Vec<Vec<f64>> = x.iter().map(|r| scaler.apply(r)).collect();
    let mut m = LinearModel::zeros(scaler, c);
    let d = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..z.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            for k in 0..c {
                let t = if y[i] == k { 1.0 } else { -1.0 };
                let w = &mut m.weights[k * d..(k + 1) * d];
                let score = m.bias[k] + w.iter().zip(&z[i]).map(|(a, b)| a * b).sum::<f64>();
                let active = t * score < 1.0;
                for (wj, zj) in w.iter_mut().zip(&z[i]) {
                    let g = l2 * *wj - if active { t * zj } else { 0.0 };
                    *wj -= learning_rate * g;
                }
                if active {
                    m.bias[k] += learning_rate * t;
                }
            }
        }
    }
    m
}
