//! Bagged CART ensemble with per-split feature subsampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{Tree, TreeParams};
use crate::flatfile::{FlatReader, FlatWriter};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub(crate) trees: Vec<Tree>,
    n_classes: usize,
}

impl Forest {
    /// Tree `t` draws from ChaCha stream `t` of `seed`, so adding trees never
    /// changes the ones already grown.
    pub fn fit(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        n_trees: usize,
        bootstrap: bool,
        params: &TreeParams,
        seed: u64,
    ) -> Forest {
        let n = x.len();
        let trees = (0..n_trees)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let samples = if bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                Tree::fit(x, y, n_classes, samples, params, &mut rng)
            })
            .collect();
        Forest { trees, n_classes }
    }

    /// Fraction of trees voting for each class.
    pub fn votes(&self, x: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.n_classes];
        for t in &self.trees {
            v[t.predict(x)] += 1.0;
        }
        let n = self.trees.len() as f64;
        v.iter_mut().for_each(|c| *c /= n);
        v
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub(crate) fn write(&self, w: &mut FlatWriter) {
        w.field("trees", self.trees.len());
        for t in &self.trees {
            t.write(w);
        }
    }

    pub(crate) fn read(r: &mut FlatReader, n_classes: usize, n_features: usize) -> Result<Forest> {
        let count: usize = r.parse("trees")?;
        let trees = (0..count)
            .map(|_| Tree::read(r, n_classes, n_features))
            .collect::<Result<Vec<_>>>()?;
        if trees.is_empty() {
            return Err(crate::Error::InvalidModel("forest has no trees".into()));
        }
        Ok(Forest { trees, n_classes })
    }
}
