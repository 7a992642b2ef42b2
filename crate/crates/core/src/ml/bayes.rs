use crate::flatfile::{FlatReader, FlatWriter};
use crate::{Error, Result};

/// Variance floor relative to the largest feature variance, so a feature
/// that is constant within a class cannot produce an infinite likelihood.
const VAR_SMOOTHING: f64 = 1e-9;

/// Gaussian naive Bayes with empirical class priors.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    log_prior: Vec<f64>,
    /// Row-major `n_classes x d`.
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl GaussianNb {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> GaussianNb {
        let d = x[0].len();
        let mut count = vec![0.0; n_classes];
        let mut mean = vec![0.0; n_classes * d];
        for (row, &c) in x.iter().zip(y) {
            count[c] += 1.0;
            for j in 0..d {
                mean[c * d + j] += row[j];
            }
        }
        for c in 0..n_classes {
            for j in 0..d {
                mean[c * d + j] /= count[c];
            }
        }
        let mut var = vec![0.0; n_classes * d];
        for (row, &c) in x.iter().zip(y) {
            for j in 0..d {
                var[c * d + j] += (row[j] - mean[c * d + j]).powi(2) / count[c];
            }
        }
        let n = x.len() as f64;
        let global_max = (0..d)
            .map(|j| {
                let m = x.iter().map(|r| r[j]).sum::<f64>() / n;
                x.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n
            })
            .fold(0.0, f64::max);
        let eps = VAR_SMOOTHING * global_max.max(f64::MIN_POSITIVE);
        var.iter_mut().for_each(|v| *v += eps);
        let log_prior = count.iter().map(|c| (c / n).ln()).collect();
        GaussianNb {
            log_prior,
            mean,
            var,
        }
    }

    fn dim(&self) -> usize {
        self.mean.len() / self.log_prior.len()
    }

    pub fn log_joint(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        self.log_prior
            .iter()
            .enumerate()
            .map(|(c, lp)| {
                lp - 0.5
                    * (0..d)
                        .map(|j| {
                            let v = self.var[c * d + j];
                            (2.0 * std::f64::consts::PI * v).ln()
                                + (x[j] - self.mean[c * d + j]).powi(2) / v
                        })
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn posterior(&self, x: &[f64]) -> Vec<f64> {
        super::linear::softmax(&self.log_joint(x))
    }

    pub(crate) fn write(&self, w: &mut FlatWriter) {
        w.block("log_prior", &self.log_prior)
            .block("mean", &self.mean)
            .block("var", &self.var);
    }

    pub(crate) fn read(r: &mut FlatReader, c: usize, d: usize) -> Result<GaussianNb> {
        let log_prior = r.block("log_prior")?;
        let mean = r.block("mean")?;
        let var = r.block("var")?;
        if log_prior.len() != c
            || mean.len() != c * d
            || var.len() != c * d
            || var.iter().any(|v| v.is_nan() || *v <= 0.0)
        {
            return Err(Error::InvalidModel("bad naive Bayes parameters".into()));
        }
        Ok(GaussianNb {
            log_prior,
            mean,
            var,
        })
    }
}
