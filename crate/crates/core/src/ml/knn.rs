use crate::flatfile::{FlatReader, FlatWriter};
use crate::{Error, Result};

/// Brute-force Euclidean k-nearest-neighbor store.
#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    k: usize,
    x: Vec<Vec<f64>>,
    y: Vec<usize>,
    n_classes: usize,
}

impl Knn {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, k: usize) -> Knn {
        Knn {
            k: k.max(1),
            x: x.to_vec(),
            y: y.to_vec(),
            n_classes,
        }
    }

    /// Label fractions among the `k` nearest stored points; equal distances
    /// keep training order.
    pub fn fractions(&self, q: &[f64]) -> Vec<f64> {
        let mut d: Vec<(f64, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, p)| {
                (
                    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
                    i,
                )
            })
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = self.k.min(d.len());
        let mut out = vec![0.0; self.n_classes];
        for &(_, i) in &d[..k] {
            out[self.y[i]] += 1.0;
        }
        out.iter_mut().for_each(|c| *c /= k as f64);
        out
    }

    pub(crate) fn write(&self, w: &mut FlatWriter) {
        w.field("k", self.k);
        w.block("x", &self.x.concat());
        w.block("y", &self.y.iter().map(|&v| v as f64).collect::<Vec<_>>());
    }

    pub(crate) fn read(r: &mut FlatReader, n_classes: usize, d: usize) -> Result<Knn> {
        let k: usize = r.parse("k")?;
        let flat = r.block("x")?;
        let y = r.block("y")?;
        if y.is_empty() || flat.len() != y.len() * d || k == 0 {
            return Err(Error::InvalidModel("inconsistent neighbor store".into()));
        }
        let y = y
            .into_iter()
            .map(|v| {
                if v >= 0.0 && v.fract() == 0.0 && (v as usize) < n_classes {
                    Ok(v as usize)
                } else {
                    Err(Error::InvalidModel(format!("bad label {v}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Knn {
            k,
            x: flat.chunks(d).map(<[f64]>::to_vec).collect(),
            y,
            n_classes,
        })
    }
}
