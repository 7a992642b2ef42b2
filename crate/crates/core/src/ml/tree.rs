//! Gini-impurity binary classification tree.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::flatfile::{FlatReader, FlatWriter};
use crate::{Error, Result};

const LEAF: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features examined per split; `None` examines all in index order.
    pub max_features: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    feature: usize,
    threshold: f64,
    left: usize,
    right: usize,
    /// Training-sample class counts reaching this node.
    counts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
    n_classes: usize,
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    1.0 - counts
        .iter()
        .map(|c| (c / total) * (c / total))
        .sum::<f64>()
}

struct Split {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl Tree {
    /// Grows a tree on the rows `samples` (repeats allowed, as in a bootstrap).
    pub fn fit(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        samples: Vec<usize>,
        params: &TreeParams,
        rng: &mut impl Rng,
    ) -> Tree {
        let mut tree = Tree {
            nodes: Vec::new(),
            n_classes,
        };
        tree.grow(x, y, samples, 0, params, rng);
        tree
    }

    fn grow(
        &mut self,
        x: &[Vec<f64>],
        y: &[usize],
        samples: Vec<usize>,
        depth: usize,
        params: &TreeParams,
        rng: &mut impl Rng,
    ) -> usize {
        let mut counts = vec![0.0; self.n_classes];
        for &i in &samples {
            counts[y[i]] += 1.0;
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            feature: LEAF,
            threshold: 0.0,
            left: LEAF,
            right: LEAF,
            counts: counts.clone(),
        });

        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        let depth_reached = params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || samples.len() < 2 * params.min_leaf.max(1) {
            return id;
        }

        let d = x[samples[0]].len();
        let mut order: Vec<usize> = (0..d).collect();
        let quota = match params.max_features {
            Some(m) if m < d => {
                order.shuffle(rng);
                m
            }
            _ => d,
        };
        // Examine `quota` features; keep going past the quota only while no
        // valid split has been found.
        let mut best: Option<Split> = None;
        for (examined, &f) in order.iter().enumerate() {
            if examined >= quota && best.is_some() {
                break;
            }
            if let Some(s) = self.best_split(x, y, &samples, f, params.min_leaf.max(1)) {
                if best.as_ref().is_none_or(|b| s.impurity < b.impurity) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else { return id };

        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .into_iter()
            .partition(|&i| x[i][split.feature] <= split.threshold);
        let l = self.grow(x, y, left, depth + 1, params, rng);
        let r = self.grow(x, y, right, depth + 1, params, rng);
        let node = &mut self.nodes[id];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        id
    }

    fn best_split(
        &self,
        x: &[Vec<f64>],
        y: &[usize],
        samples: &[usize],
        f: usize,
        min_leaf: usize,
    ) -> Option<Split> {
        let mut sorted: Vec<usize> = samples.to_vec();
        sorted.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]));
        let n = sorted.len();
        let mut right = vec![0.0; self.n_classes];
        for &i in &sorted {
            right[y[i]] += 1.0;
        }
        let mut left = vec![0.0; self.n_classes];
        let mut best: Option<Split> = None;
        for k in 0..n - 1 {
            let c = y[sorted[k]];
            left[c] += 1.0;
            right[c] -= 1.0;
            let (a, b) = (x[sorted[k]][f], x[sorted[k + 1]][f]);
            if a == b || k + 1 < min_leaf || n - k - 1 < min_leaf {
                continue;
            }
            let nl = (k + 1) as f64;
            let nr = (n - k - 1) as f64;
            let impurity = (nl * gini(&left, nl) + nr * gini(&right, nr)) / n as f64;
            if best.as_ref().is_none_or(|s| impurity < s.impurity) {
                let mut threshold = 0.5 * (a + b);
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Split {
                    feature: f,
                    threshold,
                    impurity,
                });
            }
        }
        best
    }

    fn leaf(&self, x: &[f64]) -> &Node {
        let mut node = &self.nodes[0];
        while node.feature != LEAF {
            node = if x[node.feature] <= node.threshold {
                &self.nodes[node.left]
            } else {
                &self.nodes[node.right]
            };
        }
        node
    }

    /// Class fractions of the training samples in the leaf `x` falls into.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let counts = &self.leaf(x).counts;
        let total: f64 = counts.iter().sum();
        counts.iter().map(|c| c / total).collect()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        super::argmax(&self.leaf(x).counts)
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, id: usize) -> usize {
            let n = &t.nodes[id];
            if n.feature == LEAF {
                0
            } else {
                1 + walk(t, n.left).max(walk(t, n.right))
            }
        }
        walk(self, 0)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub(crate) fn write(&self, w: &mut FlatWriter) {
        let enc = |v: usize| if v == LEAF { -1.0 } else { v as f64 };
        w.block(
            "tree_feature",
            &self
                .nodes
                .iter()
                .map(|n| enc(n.feature))
                .collect::<Vec<_>>(),
        );
        w.block(
            "tree_threshold",
            &self.nodes.iter().map(|n| n.threshold).collect::<Vec<_>>(),
        );
        w.block(
            "tree_left",
            &self.nodes.iter().map(|n| enc(n.left)).collect::<Vec<_>>(),
        );
        w.block(
            "tree_right",
            &self.nodes.iter().map(|n| enc(n.right)).collect::<Vec<_>>(),
        );
        w.block(
            "tree_counts",
            &self
                .nodes
                .iter()
                .flat_map(|n| n.counts.iter().copied())
                .collect::<Vec<_>>(),
        );
    }

    pub(crate) fn read(r: &mut FlatReader, n_classes: usize, n_features: usize) -> Result<Tree> {
        let feature = r.block("tree_feature")?;
        let threshold = r.block("tree_threshold")?;
        let left = r.block("tree_left")?;
        let right = r.block("tree_right")?;
        let counts = r.block("tree_counts")?;
        let m = feature.len();
        if m == 0
            || threshold.len() != m
            || left.len() != m
            || right.len() != m
            || counts.len() != m * n_classes
        {
            return Err(Error::InvalidModel("inconsistent tree blocks".into()));
        }
        let dec = |v: f64, limit: usize| -> Result<usize> {
            if v == -1.0 {
                Ok(LEAF)
            } else if v >= 0.0 && v.fract() == 0.0 && (v as usize) < limit {
                Ok(v as usize)
            } else {
                Err(Error::InvalidModel(format!("bad tree index {v}")))
            }
        };
        let mut nodes = Vec::with_capacity(m);
        for i in 0..m {
            let node = Node {
                feature: dec(feature[i], n_features)?,
                threshold: threshold[i],
                left: dec(left[i], m)?,
                right: dec(right[i], m)?,
                counts: counts[i * n_classes..(i + 1) * n_classes].to_vec(),
            };
            // children always follow their parent, which rules out cycles
            if node.feature != LEAF && (node.left <= i || node.right <= i) {
                return Err(Error::InvalidModel(
                    "tree children must follow their parent".into(),
                ));
            }
            if node.feature == LEAF && node.counts.iter().sum::<f64>() <= 0.0 {
                return Err(Error::InvalidModel("empty leaf".into()));
            }
            nodes.push(node);
        }
        Ok(Tree { nodes, n_classes })
    }
}
