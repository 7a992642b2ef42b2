//! First-order update rules over a flat parameter vector.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Sgd,
    RmsProp,
    Adagrad,
    Adadelta,
    Adam,
    Adamax,
    Nadam,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 7] = [
        OptimizerKind::Sgd,
        OptimizerKind::RmsProp,
        OptimizerKind::Adagrad,
        OptimizerKind::Adadelta,
        OptimizerKind::Adam,
        OptimizerKind::Adamax,
        OptimizerKind::Nadam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::RmsProp => "rmsprop",
            OptimizerKind::Adagrad => "adagrad",
            OptimizerKind::Adadelta => "adadelta",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Adamax => "adamax",
            OptimizerKind::Nadam => "nadam",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        OptimizerKind::ALL.into_iter().find(|k| k.name() == lower).ok_or_else(|| {
            Error::Config(format!("unknown optimizer `{s}` (valid: sgd, rmsprop, adagrad, adadelta, adam, adamax, nadam)"))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    pub learning_rate: f64,
    /// Decay of the squared-gradient average (RMSprop, Adadelta).
    pub rho: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Hyper {
    pub fn defaults(kind: OptimizerKind) -> Hyper {
        let base = Hyper {
            learning_rate: 0.001,
            rho: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        };
        match kind {
            OptimizerKind::Sgd | OptimizerKind::Adagrad => Hyper {
                learning_rate: 0.01,
                ..base
            },
            OptimizerKind::RmsProp | OptimizerKind::Adam => base,
            OptimizerKind::Adadelta => Hyper {
                learning_rate: 1.0,
                rho: 0.95,
                epsilon: 1e-6,
                ..base
            },
            OptimizerKind::Adamax | OptimizerKind::Nadam => Hyper {
                learning_rate: 0.002,
                ..base
            },
        }
    }
}

/// Optimizer state: two accumulators shaped like the parameters and a step
/// counter. Which accumulator means what depends on the rule:
///
/// | rule     | `first`               | `second`              |
/// |----------|-----------------------|-----------------------|
/// | RMSprop  | -                     | leaky mean of g^2     |
/// | Adagrad  | -                     | sum of g^2            |
/// | Adadelta | leaky mean of delta^2 | leaky mean of g^2     |
/// | Adam     | first moment          | second moment         |
/// | Adamax   | first moment          | infinity-norm moment  |
/// | Nadam    | first moment          | second moment         |
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub hyper: Hyper,
    pub step: u64,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, n_params: usize) -> Optimizer {
        Optimizer::with_hyper(kind, Hyper::defaults(kind), n_params)
    }

    pub fn with_hyper(kind: OptimizerKind, hyper: Hyper, n_params: usize) -> Optimizer {
        Optimizer {
            kind,
            hyper,
            step: 0,
            first: vec![0.0; n_params],
            second: vec![0.0; n_params],
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.first.len() {
            return Err(Error::Shape {
                expected: self.first.len(),
                found: params.len(),
            });
        }
        if grads.len() != params.len() {
            return Err(Error::Shape {
                expected: params.len(),
                found: grads.len(),
            });
        }
        self.step += 1;
        let Hyper {
            learning_rate: lr,
            rho,
            beta1: b1,
            beta2: b2,
            epsilon: eps,
        } = self.hyper;
        let t = self.step as i32;
        let (m, v) = (&mut self.first, &mut self.second);
        match self.kind {
            OptimizerKind::Sgd => {
                for (w, g) in params.iter_mut().zip(grads) {
                    *w -= lr * g;
                }
            }
            OptimizerKind::RmsProp => {
                for i in 0..params.len() {
                    let g = grads[i];
                    v[i] = rho * v[i] + (1.0 - rho) * g * g;
                    params[i] -= lr * g / (v[i].sqrt() + eps);
                }
            }
            OptimizerKind::Adagrad => {
                for i in 0..params.len() {
                    let g = grads[i];
                    v[i] += g * g;
                    params[i] -= lr * g / (v[i].sqrt() + eps);
                }
            }
            OptimizerKind::Adadelta => {
                for i in 0..params.len() {
                    let g = grads[i];
                    v[i] = rho * v[i] + (1.0 - rho) * g * g;
                    let delta = -((m[i] + eps).sqrt() / (v[i] + eps).sqrt()) * g;
                    m[i] = rho * m[i] + (1.0 - rho) * delta * delta;
                    params[i] += lr * delta;
                }
            }
            OptimizerKind::Adam => {
                let (c1, c2) = (1.0 - b1.powi(t), 1.0 - b2.powi(t));
                for i in 0..params.len() {
                    let g = grads[i];
                    m[i] = b1 * m[i] + (1.0 - b1) * g;
                    v[i] = b2 * v[i] + (1.0 - b2) * g * g;
                    params[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
                }
            }
            OptimizerKind::Adamax => {
                let c1 = 1.0 - b1.powi(t);
                for i in 0..params.len() {
                    let g = grads[i];
                    m[i] = b1 * m[i] + (1.0 - b1) * g;
                    v[i] = (b2 * v[i]).max(g.abs());
                    params[i] -= (lr / c1) * m[i] / (v[i] + eps);
                }
            }
            OptimizerKind::Nadam => {
                let (c1, c1_next, c2) = (1.0 - b1.powi(t), 1.0 - b1.powi(t + 1), 1.0 - b2.powi(t));
                for i in 0..params.len() {
                    let g = grads[i];
                    m[i] = b1 * m[i] + (1.0 - b1) * g;
                    v[i] = b2 * v[i] + (1.0 - b2) * g * g;
                    let blend = b1 * m[i] / c1_next + (1.0 - b1) * g / c1;
                    params[i] -= lr * blend / ((v[i] / c2).sqrt() + eps);
                }
            }
        }
        Ok(())
    }
}
