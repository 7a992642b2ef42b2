//! Linear discriminant analysis: shared-covariance Gaussian classifier plus
//! the Fisher projection onto `C - 1` discriminant directions.

use nalgebra::{DMatrix, DVector};

use crate::flatfile::{FlatReader, FlatWriter};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Lda {
    log_prior: Vec<f64>,
    /// Row-major `n_classes x d`.
    means: Vec<f64>,
    /// Row-major `n_classes x d`: `Sigma^-1 mu_c`.
    coef: Vec<f64>,
    /// `-1/2 mu_c' Sigma^-1 mu_c + log pi_c`.
    intercept: Vec<f64>,
    /// Row-major `(n_classes - 1) x d` projection.
    projection: Vec<f64>,
}

impl Lda {
    /// `ridge` is added to the pooled covariance diagonal, scaled by its
    /// mean diagonal entry so it behaves the same for any feature units.
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, ridge: f64) -> Lda {
        let d = x[0].len();
        let n = x.len();
        let mut count = vec![0usize; n_classes];
        let mut means = vec![DVector::<f64>::zeros(d); n_classes];
        for (row, &c) in x.iter().zip(y) {
            count[c] += 1;
            means[c] += DVector::from_column_slice(row);
        }
        for c in 0..n_classes {
            means[c] /= count[c] as f64;
        }
        let overall = x
            .iter()
            .fold(DVector::zeros(d), |a, r| a + DVector::from_column_slice(r))
            / n as f64;

        let mut sw = DMatrix::<f64>::zeros(d, d);
        for (row, &c) in x.iter().zip(y) {
            let dv = DVector::from_column_slice(row) - &means[c];
            sw += &dv * dv.transpose();
        }
        sw /= (n.saturating_sub(n_classes)).max(1) as f64;
        let mut sb = DMatrix::<f64>::zeros(d, d);
        for c in 0..n_classes {
            let dv = &means[c] - &overall;
            sb += (&dv * dv.transpose()) * (count[c] as f64 / n as f64);
        }

        if sw.clone().cholesky().is_none() {
            log::warn!("LDA: pooled covariance is singular, relying on ridge regularization");
        }
        let scale = (sw.trace() / d as f64).max(f64::MIN_POSITIVE);
        let mut lambda = ridge * scale;
        let chol = loop {
            let mut m = sw.clone();
            for i in 0..d {
                m[(i, i)] += lambda;
            }
            if let Some(ch) = m.cholesky() {
                break ch;
            }
            log::warn!("LDA: ridge {lambda:e} insufficient, increasing");
            lambda = if lambda > 0.0 {
                lambda * 10.0
            } else {
                1e-12 * scale
            };
        };

        let log_prior: Vec<f64> = count.iter().map(|&c| (c as f64 / n as f64).ln()).collect();
        let mut coef = Vec::with_capacity(n_classes * d);
        let mut intercept = Vec::with_capacity(n_classes);
        for c in 0..n_classes {
            let a = chol.solve(&means[c]);
            intercept.push(-0.5 * a.dot(&means[c]) + log_prior[c]);
            coef.extend(a.iter());
        }

        // Sb v = lambda Sw v  via  L^-1 Sb L^-T u = lambda u,  v = L^-T u.
        let l = chol.l();
        let linv = l
            .clone()
            .try_inverse()
            .expect("Cholesky factor is invertible");
        let m = &linv * &sb * linv.transpose();
        let m = (&m + m.transpose()) * 0.5;
        let eig = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .total_cmp(&eig.eigenvalues[a])
                .then(a.cmp(&b))
        });
        let span = &means[n_classes - 1] - &means[0];
        let mut projection = Vec::with_capacity((n_classes - 1) * d);
        for &k in order.iter().take(n_classes - 1) {
            let u = eig.eigenvectors.column(k).into_owned();
            let mut v = linv.transpose() * u;
            // Orient so the last class projects above the first.
            if v.dot(&span) < 0.0 {
                v = -v;
            }
            projection.extend(v.iter());
        }

        Lda {
            log_prior,
            means: means
                .iter()
                .flat_map(|m| m.iter().copied().collect::<Vec<_>>())
                .collect(),
            coef,
            intercept,
            projection,
        }
    }

    fn n_classes(&self) -> usize {
        self.log_prior.len()
    }

    fn dim(&self) -> usize {
        self.means.len() / self.n_classes()
    }

    pub fn discriminants(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..self.n_classes())
            .map(|c| {
                self.intercept[c]
                    + self.coef[c * d..(c + 1) * d]
                        .iter()
                        .zip(x)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn posterior(&self, x: &[f64]) -> Vec<f64> {
        super::linear::softmax(&self.discriminants(x))
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        self.projection
            .chunks(d)
            .map(|v| v.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn class_mean(&self, c: usize) -> &[f64] {
        let d = self.dim();
        &self.means[c * d..(c + 1) * d]
    }

    pub(crate) fn write(&self, w: &mut FlatWriter) {
        w.block("log_prior", &self.log_prior)
            .block("means", &self.means)
            .block("coef", &self.coef)
            .block("intercept", &self.intercept)
            .block("projection", &self.projection);
    }

    pub(crate) fn read(r: &mut FlatReader, c: usize, d: usize) -> Result<Lda> {
        let lda = Lda {
            log_prior: r.block("log_prior")?,
            means: r.block("means")?,
            coef: r.block("coef")?,
            intercept: r.block("intercept")?,
            projection: r.block("projection")?,
        };
        if lda.log_prior.len() != c
            || lda.means.len() != c * d
            || lda.coef.len() != c * d
            || lda.intercept.len() != c
            || lda.projection.len() != (c - 1) * d
        {
            return Err(Error::InvalidModel("bad LDA parameters".into()));
        }
        Ok(lda)
    }
}
