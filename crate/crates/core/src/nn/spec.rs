//! Declarative layer lists for the two fixed topologies.

use super::{Head, Network, Node};
use crate::face::EMOTION_DIM;
use crate::skeleton::POSTURE_DIM;
use crate::Result;

/// One step of a layer chain. Hidden dense layers are numbered from 1 in
/// the order they appear; `Concat` names two of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    Dense(usize),
    Dropout(f64),
    Concat(usize, usize),
}

/// The 14-hidden-layer emotion topology: H6 and H10 merge before H11, H4 and
/// H12 merge before H13, dropout follows H4 and H5.
pub const EMOTION_NET_SPEC: &[LayerSpec] = &[
    LayerSpec::Dense(50),
    LayerSpec::Dense(40),
    LayerSpec::Dense(30),
    LayerSpec::Dense(20),
    LayerSpec::Dropout(0.2),
    LayerSpec::Dense(20),
    LayerSpec::Dropout(0.3),
    LayerSpec::Dense(20),
    LayerSpec::Dense(10),
    LayerSpec::Dense(5),
    LayerSpec::Dense(10),
    LayerSpec::Dense(20),
    LayerSpec::Concat(6, 10),
    LayerSpec::Dense(20),
    LayerSpec::Dense(25),
    LayerSpec::Concat(4, 12),
    LayerSpec::Dense(25),
    LayerSpec::Dense(7),
];

pub const POSTURE_NET_SPEC: &[LayerSpec] = &[
    LayerSpec::Dense(32),
    LayerSpec::Dense(16),
    LayerSpec::Dense(8),
];

/// Builds the chain with rectified-linear hidden layers and a linear output
/// layer sized for the head: sigmoid for two classes, softmax otherwise.
pub fn build_from_spec(
    input: usize,
    spec: &[LayerSpec],
    classes: Vec<String>,
    seed: u64,
) -> Result<Network> {
    let mut nodes = vec![Node::Input { dim: input }];
    let mut dims = vec![input];
    let mut hidden = Vec::new();
    let mut offset = 0;
    let mut dense = |nodes: &mut Vec<Node>, dims: &mut Vec<usize>, out_dim: usize, relu: bool| {
        let input = nodes.len() - 1;
        let in_dim = dims[input];
        nodes.push(Node::Dense {
            input,
            in_dim,
            out_dim,
            weights: offset,
            bias: offset + in_dim * out_dim,
            relu,
        });
        dims.push(out_dim);
        offset += in_dim * out_dim + out_dim;
    };
    for layer in spec {
        match *layer {
            LayerSpec::Dense(w) => {
                dense(&mut nodes, &mut dims, w, true);
                hidden.push(nodes.len() - 1);
            }
            LayerSpec::Dropout(rate) => {
                nodes.push(Node::Dropout {
                    input: nodes.len() - 1,
                    rate,
                });
                dims.push(*dims.last().expect("input present"));
            }
            LayerSpec::Concat(a, b) => {
                let pick = |h: usize| {
                    hidden.get(h.wrapping_sub(1)).copied().ok_or_else(|| {
                        crate::Error::InvalidModel(format!(
                            "concat names hidden layer {h}, which does not exist yet"
                        ))
                    })
                };
                let inputs = vec![pick(a)?, pick(b)?];
                dims.push(inputs.iter().map(|&i| dims[i]).sum());
                nodes.push(Node::Concat { inputs });
            }
        }
    }
    let (head, out) = if classes.len() == 2 {
        (Head::Sigmoid, 1)
    } else {
        (Head::Softmax, classes.len())
    };
    dense(&mut nodes, &mut dims, out, false);
    let mut net = Network::new(nodes, head, classes)?;
    net.init(seed);
    Ok(net)
}

pub fn emotion_net(classes: Vec<String>, seed: u64) -> Result<Network> {
    build_from_spec(EMOTION_DIM, EMOTION_NET_SPEC, classes, seed)
}

pub fn posture_net(classes: Vec<String>, seed: u64) -> Result<Network> {
    build_from_spec(POSTURE_DIM, POSTURE_NET_SPEC, classes, seed)
}
