//! Flat `key = value` run configuration shared by every command.
//!
//! ```text
//! # comments and blank lines are ignored
//! seed = 42
//! pose.joint_noise = 0.02
//! model.n_trees = 200
//! control.deadband = 40
//! ```
//!
//! Unknown keys and out-of-range values are rejected. `model.<key>` entries
//! are checked against the chosen model kind when a model config is built.

use std::collections::BTreeMap;
use std::path::Path;

use crate::control::{ControlConfig, LightPlant, LoopConfig};
use crate::ml::{ModelConfig, ModelKind};
use crate::nn::{FitConfig, Hyper, OptimizerKind};
use crate::synth::{FaceGenConfig, PoseGenConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// Integer >= 0.
    Count,
    /// Integer >= 1.
    Positive,
    /// Finite real >= 0.
    NonNegative,
    /// Finite real > 0.
    PositiveReal,
    /// Real strictly inside (0, 1).
    Fraction,
    Path,
}

/// Every accepted key with its value constraint and meaning.
pub const KEYS: &[(&str, &str)] = &[
    ("seed", "master seed for generation, training and splits"),
    ("pose.subjects", "posture generator: number of subjects"),
    ("pose.frames", "posture generator: frames per subject"),
    (
        "pose.joint_noise",
        "posture generator: joint noise sigma, meters",
    ),
    ("face.subjects", "face generator: number of subjects"),
    ("face.frames", "face generator: frames per subject"),
    (
        "face.landmark_noise",
        "face generator: landmark noise sigma, meters",
    ),
    ("nn.epochs", "network training epochs"),
    ("nn.batch", "network minibatch size"),
    (
        "nn.learning_rate",
        "optimizer learning rate (default depends on the optimizer)",
    ),
    ("nn.rho", "RMSprop / Adadelta decay"),
    ("nn.beta1", "Adam-family first-moment decay"),
    ("nn.beta2", "Adam-family second-moment decay"),
    ("nn.epsilon", "optimizer epsilon"),
    ("eval.folds", "cross-validation folds"),
    (
        "eval.holdout",
        "fraction of subjects held out for the blind test",
    ),
    ("control.target_standing", "lux target while standing"),
    ("control.target_sitting", "lux target while sitting"),
    ("control.target_lying", "lux target while lying down"),
    ("control.deadband", "lux error tolerated without commands"),
    ("control.step_period_ms", "control step period"),
    (
        "control.steps_comfortable",
        "intensity commands per step when comfortable",
    ),
    (
        "control.steps_neutral",
        "intensity commands per step when neutral",
    ),
    (
        "control.steps_uncomfortable",
        "intensity commands per step when uncomfortable",
    ),
    (
        "plant.lux_per_level",
        "lux added per light per intensity level",
    ),
    ("plant.ambient", "ambient lux"),
    ("sensor.window_ms", "PIR pairing window"),
    ("loop.max_steps", "closed-loop step limit"),
    ("sim.posture_model", "posture model file for simulate"),
    ("sim.emotion_model", "emotion model file for simulate"),
];

fn kind_of(key: &str) -> Option<Kind> {
    Some(match key {
        "seed"
        | "control.steps_comfortable"
        | "control.steps_neutral"
        | "control.steps_uncomfortable" => Kind::Count,
        "pose.subjects"
        | "pose.frames"
        | "face.subjects"
        | "face.frames"
        | "nn.epochs"
        | "nn.batch"
        | "eval.folds"
        | "control.step_period_ms"
        | "loop.max_steps" => Kind::Positive,
        "pose.joint_noise"
        | "face.landmark_noise"
        | "control.deadband"
        | "plant.ambient"
        | "sensor.window_ms" => Kind::NonNegative,
        "nn.learning_rate"
        | "nn.epsilon"
        | "control.target_standing"
        | "control.target_sitting"
        | "control.target_lying"
        | "plant.lux_per_level" => Kind::PositiveReal,
        "nn.rho" | "nn.beta1" | "nn.beta2" | "eval.holdout" => Kind::Fraction,
        "sim.posture_model" | "sim.emotion_model" => Kind::Path,
        k if k.strip_prefix("model.").is_some_and(|m| {
            ModelKind::ALL
                .iter()
                .any(|kind| kind.config_keys().contains(&m))
        }) =>
        {
            Kind::Path
        }
        _ => return None,
    })
}

fn check(kind: Kind, value: &str) -> bool {
    let real = value.parse::<f64>().ok().filter(|v| v.is_finite());
    match kind {
        Kind::Count => value.parse::<u64>().is_ok(),
        Kind::Positive => value.parse::<u64>().is_ok_and(|v| v >= 1),
        Kind::NonNegative => real.is_some_and(|v| v >= 0.0),
        Kind::PositiveReal => real.is_some_and(|v| v > 0.0),
        Kind::Fraction => real.is_some_and(|v| v > 0.0 && v < 1.0),
        Kind::Path => !value.is_empty(),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::format(i + 1, "expected `key = value`"))?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| Error::format(i + 1, e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        RunConfig::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets (or overrides) one key after validating it.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let kind = kind_of(key).ok_or_else(|| Error::Config(format!("unknown key `{key}`")))?;
        if !check(kind, value) {
            return Err(Error::Config(format!(
                "invalid value `{value}` for `{key}`"
            )));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Option<T> {
        // Values were validated on insertion.
        self.get(key).and_then(|v| v.parse().ok())
    }

    pub fn seed(&self) -> u64 {
        self.num("seed").unwrap_or(42)
    }

    pub fn pose_config(&self) -> Result<PoseGenConfig> {
        let d = PoseGenConfig::default();
        let cfg = PoseGenConfig {
            subjects: self.num("pose.subjects").unwrap_or(d.subjects),
            frames_per_subject: self.num("pose.frames").unwrap_or(d.frames_per_subject),
            joint_noise: self.num("pose.joint_noise").unwrap_or(d.joint_noise),
            seed: self.seed(),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn face_config(&self) -> Result<FaceGenConfig> {
        let d = FaceGenConfig::default();
        let cfg = FaceGenConfig {
            subjects: self.num("face.subjects").unwrap_or(d.subjects),
            frames_per_subject: self.num("face.frames").unwrap_or(d.frames_per_subject),
            landmark_noise: self.num("face.landmark_noise").unwrap_or(d.landmark_noise),
            seed: self.seed(),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults for `kind` overridden by every `model.<key>` entry; a key the
    /// kind does not use is an error.
    pub fn model_config(&self, kind: ModelKind) -> Result<ModelConfig> {
        ModelConfig::from_pairs(
            kind,
            self.entries
                .iter()
                .filter_map(|(k, v)| k.strip_prefix("model.").map(|k| (k, v.as_str()))),
        )
    }

    /// Like [`RunConfig::model_config`] but skips `model.<key>` entries the
    /// kind does not use, for pipelines whose stages share one config.
    pub fn model_config_shared(&self, kind: ModelKind) -> Result<ModelConfig> {
        ModelConfig::from_pairs(
            kind,
            self.entries.iter().filter_map(|(k, v)| {
                k.strip_prefix("model.")
                    .filter(|m| kind.config_keys().contains(m))
                    .map(|k| (k, v.as_str()))
            }),
        )
    }

    pub fn optimizer_hyper(&self, kind: OptimizerKind) -> Hyper {
        let d = Hyper::defaults(kind);
        Hyper {
            learning_rate: self.num("nn.learning_rate").unwrap_or(d.learning_rate),
            rho: self.num("nn.rho").unwrap_or(d.rho),
            beta1: self.num("nn.beta1").unwrap_or(d.beta1),
            beta2: self.num("nn.beta2").unwrap_or(d.beta2),
            epsilon: self.num("nn.epsilon").unwrap_or(d.epsilon),
        }
    }

    pub fn fit_config(&self) -> FitConfig {
        let d = FitConfig::default();
        FitConfig {
            epochs: self.num("nn.epochs").unwrap_or(d.epochs),
            batch: self.num("nn.batch").unwrap_or(d.batch),
            seed: self.seed(),
        }
    }

    pub fn folds(&self) -> usize {
        self.num("eval.folds").unwrap_or(crate::eval::DEFAULT_FOLDS)
    }

    pub fn holdout(&self) -> f64 {
        self.num("eval.holdout")
            .unwrap_or(crate::eval::DEFAULT_HOLDOUT)
    }

    pub fn control_config(&self) -> Result<ControlConfig> {
        let d = ControlConfig::default();
        let cfg = ControlConfig {
            targets: [
                self.num("control.target_standing").unwrap_or(d.targets[0]),
                self.num("control.target_sitting").unwrap_or(d.targets[1]),
                self.num("control.target_lying").unwrap_or(d.targets[2]),
            ],
            deadband: self.num("control.deadband").unwrap_or(d.deadband),
            step_period_ms: self
                .num("control.step_period_ms")
                .unwrap_or(d.step_period_ms),
            emotion_steps: [
                self.num("control.steps_comfortable")
                    .unwrap_or(d.emotion_steps[0]),
                self.num("control.steps_neutral")
                    .unwrap_or(d.emotion_steps[1]),
                self.num("control.steps_uncomfortable")
                    .unwrap_or(d.emotion_steps[2]),
            ],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn plant(&self) -> LightPlant {
        let d = LightPlant::default();
        LightPlant {
            lux_per_level: self.num("plant.lux_per_level").unwrap_or(d.lux_per_level),
            ambient: self.num("plant.ambient").unwrap_or(d.ambient),
            ..d
        }
    }

    pub fn window_ms(&self) -> u64 {
        self.num::<f64>("sensor.window_ms")
            .map_or(crate::sensor::DEFAULT_WINDOW_MS, |v| v.round() as u64)
    }

    pub fn loop_config(&self) -> LoopConfig {
        let d = LoopConfig::default();
        LoopConfig {
            max_steps: self.num("loop.max_steps").unwrap_or(d.max_steps),
            ..d
        }
    }
}
