//! Feedforward networks as explicit layer DAGs, trained by backpropagation.
//!
//! Nodes are kept in topological order: every node reads only from nodes
//! with a smaller index, node 0 is the single input and the last node is the
//! output. All trainable weights live in one flat vector so optimizers and
//! gradient checks can treat them uniformly.

mod optim;
mod spec;

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use optim::{Hyper, Optimizer, OptimizerKind};
pub use spec::{
    build_from_spec, emotion_net, posture_net, LayerSpec, EMOTION_NET_SPEC, POSTURE_NET_SPEC,
};

use crate::dataset::Dataset;
use crate::flatfile::{FlatReader, FlatWriter};
use crate::ml::Classifier;
use crate::{Error, Result};

pub const NET_MAGIC: &str = "LUMISENSE-NET";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    /// One logit; the probability of class index 1.
    Sigmoid,
    /// One logit per class.
    Softmax,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Input {
        dim: usize,
    },
    /// `weights` and `bias` are offsets into the flat parameter vector;
    /// weights are row-major `out x in`.
    Dense {
        input: usize,
        in_dim: usize,
        out_dim: usize,
        weights: usize,
        bias: usize,
        relu: bool,
    },
    Dropout {
        input: usize,
        rate: f64,
    },
    Concat {
        inputs: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<Node>,
    dims: Vec<usize>,
    pub params: Vec<f64>,
    pub head: Head,
    pub classes: Vec<String>,
    /// Bumped whenever parameters change through [`Network::apply_update`],
    /// so caches from an older forward pass can be detected.
    generation: u64,
}

/// Everything backward needs from one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    /// Output of every node (after activation / dropout).
    pub values: Vec<Vec<f64>>,
    /// Dropout multipliers, `None` for non-dropout nodes.
    pub masks: Vec<Option<Vec<f64>>>,
    /// Head probabilities: one value for sigmoid, one per class for softmax.
    pub output: Vec<f64>,
    generation: u64,
}

impl ForwardCache {
    pub fn logits(&self) -> &[f64] {
        self.values.last().expect("network has nodes")
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Network {
    /// Checks topology and dimensions. Parameters are zero until
    /// [`Network::init`].
    pub fn new(nodes: Vec<Node>, head: Head, classes: Vec<String>) -> Result<Network> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        if !matches!(nodes.first(), Some(Node::Input { dim }) if *dim > 0) {
            return bad("first node must be a non-empty input".into());
        }
        let mut dims = Vec::with_capacity(nodes.len());
        let mut consumed = vec![false; nodes.len()];
        let mut n_params = 0;
        for (i, node) in nodes.iter().enumerate() {
            let refs: Vec<usize> = match node {
                Node::Input { .. } if i > 0 => return bad("only one input node allowed".into()),
                Node::Input { .. } => vec![],
                Node::Dense { input, .. } | Node::Dropout { input, .. } => vec![*input],
                Node::Concat { inputs } if inputs.len() < 2 => {
                    return bad(format!("concat node {i} needs two inputs"))
                }
                Node::Concat { inputs } => inputs.clone(),
            };
            if let Some(&r) = refs.iter().find(|&&r| r >= i) {
                return bad(format!(
                    "node {i} reads node {r}, which does not precede it"
                ));
            }
            refs.iter().for_each(|&r| consumed[r] = true);
            let dim = match node {
                Node::Input { dim } => *dim,
                Node::Dense {
                    input,
                    in_dim,
                    out_dim,
                    weights,
                    bias,
                    ..
                } => {
                    if dims[*input] != *in_dim || *out_dim == 0 {
                        return bad(format!(
                            "dense node {i} expects {in_dim} inputs, gets {}",
                            dims[*input]
                        ));
                    }
                    if *weights != n_params || *bias != n_params + in_dim * out_dim {
                        return bad(format!(
                            "dense node {i} has non-contiguous parameter offsets"
                        ));
                    }
                    n_params += in_dim * out_dim + out_dim;
                    *out_dim
                }
                Node::Dropout { input, rate } => {
                    if !(0.0..1.0).contains(rate) {
                        return bad(format!("dropout rate {rate} outside [0, 1)"));
                    }
                    dims[*input]
                }
                Node::Concat { inputs } => inputs.iter().map(|&r| dims[r]).sum(),
            };
            dims.push(dim);
        }
        let last = nodes.len() - 1;
        if let Some(i) = (0..last).find(|&i| !consumed[i]) {
            return bad(format!("node {i} is a second output"));
        }
        if !matches!(nodes[last], Node::Dense { relu: false, .. }) {
            return bad("output node must be a linear dense layer".into());
        }
        let expected = match head {
            Head::Sigmoid if classes.len() == 2 => 1,
            Head::Sigmoid => return bad("sigmoid head needs exactly two classes".into()),
            Head::Softmax => classes.len(),
        };
        if dims[last] != expected || classes.is_empty() {
            return Err(Error::Shape {
                expected,
                found: dims[last],
            });
        }
        Ok(Network {
            nodes,
            dims,
            params: vec![0.0; n_params],
            head,
            classes,
            generation: 0,
        })
    }

    /// Uniform fan-in initialization `U(-sqrt(6/fan_in), sqrt(6/fan_in))` for
    /// weights; biases start at zero.
    pub fn init(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for node in &self.nodes {
            if let Node::Dense {
                in_dim,
                out_dim,
                weights,
                bias,
                ..
            } = *node
            {
                let limit = (6.0 / in_dim as f64).sqrt();
                for w in &mut self.params[weights..weights + in_dim * out_dim] {
                    *w = rng.random_range(-limit..limit);
                }
                self.params[bias..bias + out_dim].fill(0.0);
            }
        }
        self.generation += 1;
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_dim(&self, i: usize) -> usize {
        self.dims[i]
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Dense layers with rectified-linear activation, in order.
    pub fn hidden_layers(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| matches!(self.nodes[i], Node::Dense { relu: true, .. }))
            .collect()
    }

    /// Replaces the parameters and invalidates older caches.
    pub fn apply_update(&mut self, f: impl FnOnce(&mut [f64]) -> Result<()>) -> Result<()> {
        f(&mut self.params)?;
        self.generation += 1;
        Ok(())
    }

    /// Forward pass. Dropout draws from `rng` in train mode only.
    pub fn forward(&self, x: &[f64], mode: Mode, rng: &mut dyn RngCore) -> Result<ForwardCache> {
        self.run(x, |_, rate, dim| {
            if mode == Mode::Infer || rate == 0.0 {
                return None;
            }
            let keep = 1.0 / (1.0 - rate);
            Some(
                (0..dim)
                    .map(|_| {
                        if rng.random::<f64>() < rate {
                            0.0
                        } else {
                            keep
                        }
                    })
                    .collect(),
            )
        })
    }

    /// Forward pass reusing the dropout masks of an earlier pass.
    pub fn forward_with_masks(
        &self,
        x: &[f64],
        masks: &[Option<Vec<f64>>],
    ) -> Result<ForwardCache> {
        if masks.len() != self.nodes.len() {
            return Err(Error::InvalidCache(
                "mask count does not match the network".into(),
            ));
        }
        self.run(x, |i, _, _| masks[i].clone())
    }

    fn run(
        &self,
        x: &[f64],
        mut mask_for: impl FnMut(usize, f64, usize) -> Option<Vec<f64>>,
    ) -> Result<ForwardCache> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let mut values: Vec<Vec<f64>> = Vec::with_capacity(self.nodes.len());
        let mut masks = vec![None; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            let v = match node {
                Node::Input { .. } => x.to_vec(),
                Node::Dense {
                    input,
                    in_dim,
                    out_dim,
                    weights,
                    bias,
                    relu,
                } => {
                    let xin = &values[*input];
                    let w = &self.params[*weights..*weights + in_dim * out_dim];
                    let b = &self.params[*bias..*bias + out_dim];
                    (0..*out_dim)
                        .map(|o| {
                            let z = b[o]
                                + w[o * in_dim..(o + 1) * in_dim]
                                    .iter()
                                    .zip(xin)
                                    .map(|(a, c)| a * c)
                                    .sum::<f64>();
                            if *relu {
                                z.max(0.0)
                            } else {
                                z
                            }
                        })
                        .collect()
                }
                Node::Dropout { input, rate } => {
                    let mask = mask_for(i, *rate, self.dims[i]);
                    let v = match &mask {
                        Some(m) if m.len() == self.dims[i] => {
                            values[*input].iter().zip(m).map(|(a, b)| a * b).collect()
                        }
                        Some(_) => {
                            return Err(Error::InvalidCache(format!(
                                "dropout mask {i} has the wrong length"
                            )))
                        }
                        None => values[*input].clone(),
                    };
                    masks[i] = mask;
                    v
                }
                Node::Concat { inputs } => inputs
                    .iter()
                    .flat_map(|&r| values[r].iter().copied())
                    .collect(),
            };
            values.push(v);
        }
        let logits = values.last().expect("network has nodes");
        let output = match self.head {
            Head::Sigmoid => vec![sigmoid(logits[0])],
            Head::Softmax => crate::ml::softmax(logits),
        };
        Ok(ForwardCache {
            values,
            masks,
            output,
            generation: self.generation,
        })
    }

    /// Cross-entropy of a cached pass against class `target`, computed from
    /// the logits in a numerically stable form.
    pub fn loss(&self, cache: &ForwardCache, target: usize) -> f64 {
        let z = cache.logits();
        match self.head {
            Head::Sigmoid => {
                let t = if target == 1 { 1.0 } else { 0.0 };
                z[0].max(0.0) - z[0] * t + (-z[0].abs()).exp().ln_1p()
            }
            Head::Softmax => {
                let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln() - z[target]
            }
        }
    }

    /// Adds the gradient of the loss at `cache` with respect to every
    /// parameter, scaled by `scale`, into `grads`.
    pub fn backward_into(
        &self,
        cache: &ForwardCache,
        target: usize,
        scale: f64,
        grads: &mut [f64],
    ) -> Result<()> {
        if cache.generation != self.generation || cache.values.len() != self.nodes.len() {
            return Err(Error::InvalidCache(
                "cache does not come from the current parameters".into(),
            ));
        }
        if grads.len() != self.params.len() {
            return Err(Error::Shape {
                expected: self.params.len(),
                found: grads.len(),
            });
        }
        if target >= self.classes.len() {
            return Err(Error::InvalidLabels(format!(
                "target {target} outside {} classes",
                self.classes.len()
            )));
        }
        let mut up: Vec<Vec<f64>> = self.dims.iter().map(|&d| vec![0.0; d]).collect();
        let last = self.nodes.len() - 1;
        up[last] = match self.head {
            Head::Sigmoid => vec![cache.output[0] - if target == 1 { 1.0 } else { 0.0 }],
            Head::Softmax => cache
                .output
                .iter()
                .enumerate()
                .map(|(k, p)| p - if k == target { 1.0 } else { 0.0 })
                .collect(),
        };
        for i in (1..self.nodes.len()).rev() {
            let g = std::mem::take(&mut up[i]);
            match &self.nodes[i] {
                Node::Input { .. } => {}
                Node::Dense {
                    input,
                    in_dim,
                    out_dim,
                    weights,
                    bias,
                    relu,
                } => {
                    let xin = &cache.values[*input];
                    let out = &cache.values[i];
                    let w = &self.params[*weights..*weights + in_dim * out_dim];
                    for o in 0..*out_dim {
                        // ReLU derivative taken as 0 at the kink.
                        let delta = if *relu && out[o] <= 0.0 { 0.0 } else { g[o] };
                        if delta == 0.0 {
                            continue;
                        }
                        grads[bias + o] += scale * delta;
                        let row = weights + o * in_dim;
                        for j in 0..*in_dim {
                            grads[row + j] += scale * delta * xin[j];
                            up[*input][j] += delta * w[o * in_dim + j];
                        }
                    }
                }
                Node::Dropout { input, .. } => match &cache.masks[i] {
                    Some(m) => up[*input]
                        .iter_mut()
                        .zip(g.iter().zip(m))
                        .for_each(|(u, (a, b))| *u += a * b),
                    None => up[*input].iter_mut().zip(&g).for_each(|(u, a)| *u += a),
                },
                Node::Concat { inputs } => {
                    let mut off = 0;
                    for &r in inputs {
                        let d = self.dims[r];
                        up[r]
                            .iter_mut()
                            .zip(&g[off..off + d])
                            .for_each(|(u, a)| *u += a);
                        off += d;
                    }
                }
            }
        }
        Ok(())
    }

    /// Gradient of the loss at `cache` for every parameter.
    pub fn backward(&self, cache: &ForwardCache, target: usize) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.params.len()];
        self.backward_into(cache, target, 1.0, &mut g)?;
        Ok(g)
    }

    /// Probabilities per class in inference mode.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        let cache = self.run(x, |_, _, _| None)?;
        Ok(match self.head {
            Head::Sigmoid => vec![1.0 - cache.output[0], cache.output[0]],
            Head::Softmax => cache.output,
        })
    }

    fn check_dataset(&self, data: &Dataset) -> Result<()> {
        if data.dim() != self.input_dim() {
            return Err(Error::Shape {
                expected: self.input_dim(),
                found: data.dim(),
            });
        }
        if data.n_classes() != self.classes.len() {
            return Err(Error::InvalidDataset(format!(
                "dataset has {} classes, network has {}",
                data.n_classes(),
                self.classes.len()
            )));
        }
        Ok(())
    }

    /// Minibatch training. Returns the mean training loss of each epoch.
    pub fn fit(
        &mut self,
        data: &Dataset,
        optimizer: &mut Optimizer,
        cfg: &FitConfig,
    ) -> Result<Vec<f64>> {
        self.check_dataset(data)?;
        if cfg.batch == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut grads = vec![0.0; self.params.len()];
        let mut history = Vec::with_capacity(cfg.epochs);
        for _ in 0..cfg.epochs {
            order.shuffle(&mut rng);
            let mut total = 0.0;
            for batch in order.chunks(cfg.batch) {
                grads.fill(0.0);
                let scale = 1.0 / batch.len() as f64;
                for &i in batch {
                    let cache = self.forward(&data.features[i], Mode::Train, &mut rng)?;
                    total += self.loss(&cache, data.labels[i]);
                    self.backward_into(&cache, data.labels[i], scale, &mut grads)?;
                }
                self.apply_update(|p| optimizer.step(p, &grads))?;
            }
            history.push(total / data.len() as f64);
        }
        Ok(history)
    }

    /// Mean inference-mode loss over `data`.
    pub fn mean_loss(&self, data: &Dataset) -> Result<f64> {
        self.check_dataset(data)?;
        let mut total = 0.0;
        for (x, &y) in data.features.iter().zip(&data.labels) {
            total += self.loss(&self.run(x, |_, _, _| None)?, y);
        }
        Ok(total / data.len() as f64)
    }

    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        self.check_dataset(data)?;
        let mut hits = 0;
        for (x, &y) in data.features.iter().zip(&data.labels) {
            hits += usize::from(self.predict(x)? == y);
        }
        Ok(hits as f64 / data.len() as f64)
    }

    pub fn to_text(&self) -> Result<String> {
        if let Some(bad) = self
            .classes
            .iter()
            .find(|c| c.is_empty() || c.contains(char::is_whitespace))
        {
            return Err(Error::InvalidModel(format!(
                "class name `{bad}` cannot be stored"
            )));
        }
        let mut w = FlatWriter::new(NET_MAGIC, FORMAT_VERSION);
        w.field(
            "head",
            match self.head {
                Head::Sigmoid => "sigmoid",
                Head::Softmax => "softmax",
            },
        );
        w.list("classes", &self.classes);
        w.field("nodes", self.nodes.len());
        for node in &self.nodes {
            let line = match node {
                Node::Input { dim } => format!("input {dim}"),
                Node::Dense {
                    input,
                    in_dim,
                    out_dim,
                    relu,
                    ..
                } => {
                    format!(
                        "dense {input} {in_dim} {out_dim} {}",
                        if *relu { "relu" } else { "linear" }
                    )
                }
                Node::Dropout { input, rate } => format!("dropout {input} {rate:?}"),
                Node::Concat { inputs } => {
                    format!(
                        "concat {}",
                        inputs
                            .iter()
                            .map(usize::to_string)
                            .collect::<Vec<_>>()
                            .join(" ")
                    )
                }
            };
            w.field("node", line);
        }
        w.block("params", &self.params);
        Ok(w.finish())
    }

    pub fn from_text(text: &str) -> Result<Network> {
        let mut r = FlatReader::new(text, NET_MAGIC)?;
        if r.version != FORMAT_VERSION {
            return Err(Error::InvalidModel(format!(
                "unsupported format version {}",
                r.version
            )));
        }
        let head = match r.field("head")? {
            "sigmoid" => Head::Sigmoid,
            "softmax" => Head::Softmax,
            h => return Err(Error::InvalidModel(format!("unknown head `{h}`"))),
        };
        let classes = r.list("classes")?.into_iter().map(String::from).collect();
        let count: usize = r.parse("nodes")?;
        let mut nodes = Vec::with_capacity(count);
        let mut offset = 0;
        for _ in 0..count {
            let line = r.field("node")?;
            let bad = || Error::InvalidModel(format!("bad node `{line}`"));
            let toks: Vec<&str> = line.split(' ').collect();
            let num = |k: usize| {
                toks.get(k)
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(bad)
            };
            let node = match toks[0] {
                "input" if toks.len() == 2 => Node::Input { dim: num(1)? },
                "dense" if toks.len() == 5 => {
                    let (in_dim, out_dim) = (num(2)?, num(3)?);
                    let relu = match toks[4] {
                        "relu" => true,
                        "linear" => false,
                        _ => return Err(bad()),
                    };
                    let n = Node::Dense {
                        input: num(1)?,
                        in_dim,
                        out_dim,
                        weights: offset,
                        bias: offset + in_dim * out_dim,
                        relu,
                    };
                    offset += in_dim * out_dim + out_dim;
                    n
                }
                "dropout" if toks.len() == 3 => Node::Dropout {
                    input: num(1)?,
                    rate: toks[2].parse().map_err(|_| bad())?,
                },
                "concat" => Node::Concat {
                    inputs: (1..toks.len()).map(num).collect::<Result<_>>()?,
                },
                _ => return Err(bad()),
            };
            nodes.push(node);
        }
        let params = r.block("params")?;
        r.end()?;
        let mut net = Network::new(nodes, head, classes)?;
        if params.len() != net.params.len() {
            return Err(Error::Shape {
                expected: net.params.len(),
                found: params.len(),
            });
        }
        net.params = params;
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Network> {
        Network::from_text(&std::fs::read_to_string(path)?)
    }
}

impl Classifier for Network {
    fn classes(&self) -> &[String] {
        &self.classes
    }

    fn dim(&self) -> usize {
        self.input_dim()
    }

    fn predict_score(&self, x: &[f64]) -> Result<Vec<f64>> {
        crate::ml::check_input(x, self.input_dim())?;
        self.predict_proba(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FitConfig {
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            epochs: 300,
            batch: 16,
            seed: 42,
        }
    }
}
