//! Model specs named on the command line and model files loaded by magic.

use std::fs;
use std::path::Path;

use lumisense::config::RunConfig;
use lumisense::dataset::Dataset;
use lumisense::ml::{
    train, Classifier, LdaSvm, ModelKind, TrainedModel, MODEL_MAGIC, PIPELINE_MAGIC,
};
use lumisense::nn::{
    build_from_spec, Network, Optimizer, OptimizerKind, EMOTION_NET_SPEC, NET_MAGIC,
    POSTURE_NET_SPEC,
};
use lumisense::skeleton::POSTURE_DIM;
use lumisense::synth::{face_dataset, gen_face_dataset, gen_skeleton_dataset, posture_dataset};
use lumisense::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSpec {
    Classic(ModelKind),
    LdaSvm,
    Net(OptimizerKind),
}

impl ModelSpec {
    pub fn parse(model: Option<&str>, optimizer: Option<&str>) -> Result<ModelSpec> {
        match (model, optimizer) {
            (Some(m), None) if m.eq_ignore_ascii_case("lda-svm") => Ok(ModelSpec::LdaSvm),
            (Some(m), None) => Ok(ModelSpec::Classic(m.parse()?)),
            (None, Some(o)) => o
                .parse()
                .map(ModelSpec::Net)
                .map_err(|e: Error| Error::Config(e.to_string())),
            _ => Err(Error::Config(
                "give exactly one of --model or --optimizer".into(),
            )),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ModelSpec::Classic(k) => k.name().to_string(),
            ModelSpec::LdaSvm => "LDA-SVM".to_string(),
            ModelSpec::Net(o) => format!("NN-{}", o.name()),
        }
    }

    pub fn config_echo(&self, cfg: &RunConfig) -> Result<Vec<String>> {
        Ok(match self {
            ModelSpec::Classic(k) => cfg.model_config(*k)?.echo(),
            ModelSpec::LdaSvm => {
                let mut lines: Vec<String> = cfg
                    .model_config_shared(ModelKind::Lda)?
                    .echo()
                    .into_iter()
                    .map(|l| format!("lda.{l}"))
                    .collect();
                lines.extend(
                    cfg.model_config_shared(ModelKind::Svm)?
                        .echo()
                        .into_iter()
                        .map(|l| format!("svm.{l}")),
                );
                lines
            }
            ModelSpec::Net(o) => {
                let h = cfg.optimizer_hyper(*o);
                let f = cfg.fit_config();
                vec![
                    format!("optimizer={}", o.name()),
                    format!("learning_rate={}", h.learning_rate),
                    format!("rho={}", h.rho),
                    format!("beta1={}", h.beta1),
                    format!("beta2={}", h.beta2),
                    format!("epsilon={}", h.epsilon),
                    format!("epochs={}", f.epochs),
                    format!("batch={}", f.batch),
                ]
            }
        })
    }

    /// Trains on `data`; returns the model and, for networks, the mean
    /// training loss of every epoch.
    pub fn fit(&self, cfg: &RunConfig, data: &Dataset) -> Result<(LoadedModel, Vec<f64>)> {
        let seed = cfg.seed();
        Ok(match self {
            ModelSpec::Classic(k) => (
                LoadedModel::Model(train(data, &cfg.model_config(*k)?, seed)?),
                Vec::new(),
            ),
            ModelSpec::LdaSvm => {
                let lda = cfg.model_config_shared(ModelKind::Lda)?;
                let svm = cfg.model_config_shared(ModelKind::Svm)?;
                (
                    LoadedModel::Pipeline(Box::new(LdaSvm::fit(data, &lda, &svm, seed)?)),
                    Vec::new(),
                )
            }
            ModelSpec::Net(o) => {
                let spec = if data.dim() == POSTURE_DIM {
                    POSTURE_NET_SPEC
                } else {
                    EMOTION_NET_SPEC
                };
                let mut net = build_from_spec(data.dim(), spec, data.classes.clone(), seed)?;
                let mut opt = Optimizer::with_hyper(*o, cfg.optimizer_hyper(*o), net.n_params());
                let history = net.fit(data, &mut opt, &cfg.fit_config())?;
                (LoadedModel::Net(net), history)
            }
        })
    }
}

pub enum LoadedModel {
    Model(TrainedModel),
    Pipeline(Box<LdaSvm>),
    Net(Network),
}

impl LoadedModel {
    pub fn load(path: &Path) -> Result<LoadedModel> {
        let text = fs::read_to_string(path)?;
        let magic = text.split_whitespace().next().unwrap_or("");
        match magic {
            m if m == MODEL_MAGIC => Ok(LoadedModel::Model(TrainedModel::from_text(&text)?)),
            m if m == PIPELINE_MAGIC => {
                Ok(LoadedModel::Pipeline(Box::new(LdaSvm::from_text(&text)?)))
            }
            m if m == NET_MAGIC => Ok(LoadedModel::Net(Network::from_text(&text)?)),
            _ => Err(Error::InvalidModel(format!(
                "{}: not a model file",
                path.display()
            ))),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = match self {
            LoadedModel::Model(m) => m.to_text()?,
            LoadedModel::Pipeline(p) => p.to_text()?,
            LoadedModel::Net(n) => n.to_text()?,
        };
        fs::write(path, text)?;
        Ok(())
    }

    pub fn as_classifier(&self) -> &dyn Classifier {
        match self {
            LoadedModel::Model(m) => m,
            LoadedModel::Pipeline(p) => p.as_ref(),
            LoadedModel::Net(n) => n,
        }
    }

    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        let mut hits = 0;
        for (x, &y) in data.features.iter().zip(&data.labels) {
            hits += usize::from(self.predict(x)? == y);
        }
        Ok(hits as f64 / data.len() as f64)
    }
}

impl Classifier for LoadedModel {
    fn classes(&self) -> &[String] {
        self.as_classifier().classes()
    }
    fn dim(&self) -> usize {
        self.as_classifier().dim()
    }
    fn predict_score(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.as_classifier().predict_score(x)
    }
}

/// RFC trained on a freshly generated posture set.
pub fn default_posture_model(cfg: &RunConfig) -> Result<LoadedModel> {
    let data = posture_dataset(&gen_skeleton_dataset(&cfg.pose_config()?)?)?;
    Ok(LoadedModel::Model(train(
        &data,
        &cfg.model_config_shared(ModelKind::Rfc)?,
        cfg.seed(),
    )?))
}

/// LDA trained on a freshly generated face set.
pub fn default_emotion_model(cfg: &RunConfig) -> Result<LoadedModel> {
    let data = face_dataset(&gen_face_dataset(&cfg.face_config()?)?)?;
    Ok(LoadedModel::Model(train(
        &data,
        &cfg.model_config_shared(ModelKind::Lda)?,
        cfg.seed(),
    )?))
}
