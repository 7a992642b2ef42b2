//! The seven classical classifiers behind one train / predict / score
//! surface, plus the LDA -> SVM pipeline.
//!
//! Model file layout (see [`crate::flatfile`] for the container):
//!
//! ```text
//! LUMISENSE-MODEL 1
//! kind RFC
//! dim 31
//! classes 3 Standing Sitting LyingDown
//! config 5 n_trees=100 max_depth=none min_leaf=1 max_features=sqrt bootstrap=true
//! ...kind-specific parameter blocks...
//! end
//! ```

mod bayes;
mod forest;
mod knn;
mod lda;
mod linear;
mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use bayes::GaussianNb;
pub use forest::Forest;
pub use knn::Knn;
pub use lda::Lda;
pub use linear::{softmax, LinearModel, Standardizer};
pub use tree::{Tree, TreeParams};

use crate::dataset::Dataset;
use crate::flatfile::{FlatReader, FlatWriter};
use crate::{Error, Result};

pub const MODEL_MAGIC: &str = "LUMISENSE-MODEL";
pub const PIPELINE_MAGIC: &str = "LUMISENSE-PIPELINE";
const FORMAT_VERSION: u32 = 1;

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Anything that maps a feature vector to per-class scores.
pub trait Classifier {
    fn classes(&self) -> &[String];
    fn dim(&self) -> usize;
    /// Higher score means more preferred class.
    fn predict_score(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict_score(x)?))
    }
}

pub(crate) fn check_input(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::Shape {
            expected: d,
            found: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidDataset("non-finite input feature".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Svm,
    Lr,
    Cart,
    Knn,
    Rfc,
    GaussianNb,
    Lda,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::Svm,
        ModelKind::Lr,
        ModelKind::Cart,
        ModelKind::Knn,
        ModelKind::Rfc,
        ModelKind::GaussianNb,
        ModelKind::Lda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Svm => "SVM",
            ModelKind::Lr => "LR",
            ModelKind::Cart => "CART",
            ModelKind::Knn => "KNN",
            ModelKind::Rfc => "RFC",
            ModelKind::GaussianNb => "GaussianNB",
            ModelKind::Lda => "LDA",
        }
    }

    /// Config keys this kind accepts.
    pub fn config_keys(self) -> &'static [&'static str] {
        match self {
            ModelKind::Svm | ModelKind::Lr => &["learning_rate", "epochs", "l2"],
            ModelKind::Cart => &["max_depth", "min_leaf"],
            ModelKind::Knn => &["k"],
            ModelKind::Rfc => &[
                "n_trees",
                "max_depth",
                "min_leaf",
                "max_features",
                "bootstrap",
            ],
            ModelKind::GaussianNb => &[],
            ModelKind::Lda => &["ridge"],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "svm" => ModelKind::Svm,
            "lr" | "logistic" => ModelKind::Lr,
            "cart" | "tree" => ModelKind::Cart,
            "knn" => ModelKind::Knn,
            "rfc" | "rf" | "forest" => ModelKind::Rfc,
            "gaussiannb" | "nb" | "gnb" => ModelKind::GaussianNb,
            "lda" => ModelKind::Lda,
            _ => {
                return Err(Error::Config(format!(
                    "unknown model `{s}` (valid: svm, lr, cart, knn, rfc, gaussiannb, lda, lda-svm)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFeatures {
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, d: usize) -> Option<usize> {
        match self {
            MaxFeatures::Sqrt => Some(((d as f64).sqrt().round() as usize).clamp(1, d)),
            MaxFeatures::All => None,
            MaxFeatures::Count(n) => Some(n.clamp(1, d)),
        }
    }
}

impl fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxFeatures::Sqrt => f.write_str("sqrt"),
            MaxFeatures::All => f.write_str("all"),
            MaxFeatures::Count(n) => write!(f, "{n}"),
        }
    }
}

/// Hyperparameters for one model kind. Only the keys the kind uses can be
/// set; anything else is rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub k: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub ridge: f64,
}

impl ModelConfig {
    pub fn new(kind: ModelKind) -> ModelConfig {
        ModelConfig {
            kind,
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            k: 5,
            learning_rate: if kind == ModelKind::Svm { 0.01 } else { 0.1 },
            epochs: 500,
            l2: 1e-4,
            ridge: 1e-6,
        }
    }

    pub fn from_pairs<'a>(
        kind: ModelKind,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<ModelConfig> {
        let mut cfg = ModelConfig::new(kind);
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !self.kind.config_keys().contains(&key) {
            return Err(Error::Config(format!(
                "unknown key `{key}` for {}",
                self.kind
            )));
        }
        let bad = || Error::Config(format!("invalid value `{value}` for `{key}`"));
        let positive = |v: &str| v.parse::<usize>().ok().filter(|n| *n >= 1).ok_or_else(bad);
        let real = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x >= 0.0)
                .ok_or_else(bad)
        };
        match key {
            "n_trees" => self.n_trees = positive(value)?,
            "max_depth" => {
                self.max_depth = if value == "none" {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad())?)
                }
            }
            "min_leaf" => self.min_leaf = positive(value)?,
            "max_features" => {
                self.max_features = match value {
                    "sqrt" => MaxFeatures::Sqrt,
                    "all" => MaxFeatures::All,
                    n => MaxFeatures::Count(positive(n)?),
                }
            }
            "bootstrap" => self.bootstrap = value.parse().map_err(|_| bad())?,
            "k" => self.k = positive(value)?,
            "learning_rate" => {
                self.learning_rate =
                    real(value).and_then(|x| if x > 0.0 { Ok(x) } else { Err(bad()) })?
            }
            "epochs" => self.epochs = value.parse().map_err(|_| bad())?,
            "l2" => self.l2 = real(value)?,
            "ridge" => self.ridge = real(value)?,
            _ => unreachable!("key list and match arms agree"),
        }
        Ok(())
    }

    /// `key=value` pairs for the keys this kind uses, in declaration order.
    pub fn echo(&self) -> Vec<String> {
        self.kind
            .config_keys()
            .iter()
            .map(|&k| {
                let v = match k {
                    "n_trees" => self.n_trees.to_string(),
                    "max_depth" => self.max_depth.map_or("none".to_string(), |d| d.to_string()),
                    "min_leaf" => self.min_leaf.to_string(),
                    "max_features" => self.max_features.to_string(),
                    "bootstrap" => self.bootstrap.to_string(),
                    "k" => self.k.to_string(),
                    "learning_rate" => format!("{:?}", self.learning_rate),
                    "epochs" => self.epochs.to_string(),
                    "l2" => format!("{:?}", self.l2),
                    "ridge" => format!("{:?}", self.ridge),
                    _ => unreachable!(),
                };
                format!("{k}={v}")
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Svm(LinearModel),
    Lr(LinearModel),
    Cart(Tree),
    Knn(Knn),
    Rfc(Forest),
    GaussianNb(GaussianNb),
    Lda(Lda),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub classes: Vec<String>,
    pub dim: usize,
    pub config: ModelConfig,
    pub params: Params,
}

/// Fits `config.kind` on `data`. Every declared class needs at least one row.
pub fn train(data: &Dataset, config: &ModelConfig, seed: u64) -> Result<TrainedModel> {
    data.validate()?;
    let counts = data.class_counts();
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::InvalidDataset(format!(
            "class `{}` has no training rows",
            data.classes[c]
        )));
    }
    let (x, y, c, d) = (&data.features, &data.labels, data.n_classes(), data.dim());
    let tree_params = |max_features| TreeParams {
        max_depth: config.max_depth,
        min_leaf: config.min_leaf,
        max_features,
    };
    let params = match config.kind {
        ModelKind::Svm => Params::Svm(linear::fit_svm(
            x,
            y,
            c,
            config.learning_rate,
            config.epochs,
            config.l2,
            seed,
        )),
        ModelKind::Lr => Params::Lr(linear::fit_logistic(
            x,
            y,
            c,
            config.learning_rate,
            config.epochs,
            config.l2,
        )),
        ModelKind::Cart => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Params::Cart(Tree::fit(
                x,
                y,
                c,
                (0..x.len()).collect(),
                &tree_params(None),
                &mut rng,
            ))
        }
        ModelKind::Knn => Params::Knn(Knn::fit(x, y, c, config.k)),
        ModelKind::Rfc => Params::Rfc(Forest::fit(
            x,
            y,
            c,
            config.n_trees,
            config.bootstrap,
            &tree_params(config.max_features.resolve(d)),
            seed,
        )),
        ModelKind::GaussianNb => Params::GaussianNb(GaussianNb::fit(x, y, c)),
        ModelKind::Lda => Params::Lda(Lda::fit(x, y, c, config.ridge)),
    };
    Ok(TrainedModel {
        kind: config.kind,
        classes: data.classes.clone(),
        dim: d,
        config: config.clone(),
        params,
    })
}

impl TrainedModel {
    /// Fraction of rows of `data` predicted correctly.
    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        let mut hits = 0;
        for (x, &y) in data.features.iter().zip(&data.labels) {
            hits += usize::from(self.predict(x)? == y);
        }
        Ok(hits as f64 / data.len() as f64)
    }

    /// Projection onto the `C - 1` discriminant directions (LDA only).
    pub fn lda_transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_input(x, self.dim)?;
        match &self.params {
            Params::Lda(l) => Ok(l.transform(x)),
            _ => Err(Error::InvalidModel(format!(
                "lda_transform needs an LDA model, got {}",
                self.kind
            ))),
        }
    }

    pub fn lda(&self) -> Option<&Lda> {
        match &self.params {
            Params::Lda(l) => Some(l),
            _ => None,
        }
    }

    pub fn forest(&self) -> Option<&Forest> {
        match &self.params {
            Params::Rfc(f) => Some(f),
            _ => None,
        }
    }

    pub fn tree(&self) -> Option<&Tree> {
        match &self.params {
            Params::Cart(t) => Some(t),
            _ => None,
        }
    }

    pub(crate) fn write_body(&self, w: &mut FlatWriter) -> Result<()> {
        if let Some(bad) = self
            .classes
            .iter()
            .find(|c| c.is_empty() || c.contains(char::is_whitespace))
        {
            return Err(Error::InvalidModel(format!(
                "class name `{bad}` cannot be stored"
            )));
        }
        w.field("kind", self.kind)
            .field("dim", self.dim)
            .list("classes", &self.classes)
            .list("config", &self.config.echo());
        match &self.params {
            Params::Svm(m) | Params::Lr(m) => m.write(w),
            Params::Cart(t) => t.write(w),
            Params::Knn(k) => k.write(w),
            Params::Rfc(f) => f.write(w),
            Params::GaussianNb(g) => g.write(w),
            Params::Lda(l) => l.write(w),
        }
        Ok(())
    }

    pub(crate) fn read_body(r: &mut FlatReader) -> Result<TrainedModel> {
        let kind: ModelKind = r.field("kind")?.parse()?;
        let dim: usize = r.parse("dim")?;
        let classes: Vec<String> = r.list("classes")?.into_iter().map(String::from).collect();
        if dim == 0 || classes.len() < 2 {
            return Err(Error::InvalidModel(
                "model needs dim >= 1 and at least two classes".into(),
            ));
        }
        let mut config = ModelConfig::new(kind);
        for item in r.list("config")? {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidModel(format!("bad config item `{item}`")))?;
            config.set(k, v)?;
        }
        let c = classes.len();
        let params = match kind {
            ModelKind::Svm => Params::Svm(LinearModel::read(r, c, dim)?),
            ModelKind::Lr => Params::Lr(LinearModel::read(r, c, dim)?),
            ModelKind::Cart => Params::Cart(Tree::read(r, c, dim)?),
            ModelKind::Knn => Params::Knn(Knn::read(r, c, dim)?),
            ModelKind::Rfc => Params::Rfc(Forest::read(r, c, dim)?),
            ModelKind::GaussianNb => Params::GaussianNb(GaussianNb::read(r, c, dim)?),
            ModelKind::Lda => Params::Lda(Lda::read(r, c, dim)?),
        };
        Ok(TrainedModel {
            kind,
            classes,
            dim,
            config,
            params,
        })
    }

    pub fn to_text(&self) -> Result<String> {
        let mut w = FlatWriter::new(MODEL_MAGIC, FORMAT_VERSION);
        self.write_body(&mut w)?;
        Ok(w.finish())
    }

    pub fn from_text(text: &str) -> Result<TrainedModel> {
        let mut r = FlatReader::new(text, MODEL_MAGIC)?;
        check_version(r.version)?;
        let m = TrainedModel::read_body(&mut r)?;
        r.end()?;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TrainedModel> {
        TrainedModel::from_text(&std::fs::read_to_string(path)?)
    }
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::InvalidModel(format!(
            "unsupported format version {v}"
        )));
    }
    Ok(())
}

impl Classifier for TrainedModel {
    fn classes(&self) -> &[String] {
        &self.classes
    }

    fn dim(&self) -> usize {
        self.dim
    }

    /// RFC: vote fractions. KNN: neighbor-label fractions. CART: leaf class
    /// fractions. LR, GaussianNB, LDA: posteriors. SVM: signed margins.
    fn predict_score(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_input(x, self.dim)?;
        Ok(match &self.params {
            Params::Svm(m) => m.margins(x),
            Params::Lr(m) => m.probabilities(x),
            Params::Cart(t) => t.predict_proba(x),
            Params::Knn(k) => k.fractions(x),
            Params::Rfc(f) => f.votes(x),
            Params::GaussianNb(g) => g.posterior(x),
            Params::Lda(l) => l.posterior(x),
        })
    }
}

/// LDA projection to `C - 1` dimensions followed by a linear SVM.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaSvm {
    pub lda: TrainedModel,
    pub svm: TrainedModel,
}

impl LdaSvm {
    pub fn fit(data: &Dataset, lda: &ModelConfig, svm: &ModelConfig, seed: u64) -> Result<LdaSvm> {
        if lda.kind != ModelKind::Lda || svm.kind != ModelKind::Svm {
            return Err(Error::Config(
                "pipeline needs an LDA and an SVM config".into(),
            ));
        }
        let lda = train(data, lda, seed)?;
        let projected = data
            .features
            .iter()
            .map(|x| lda.lda_transform(x))
            .collect::<Result<Vec<_>>>()?;
        let reduced = Dataset::new(
            projected,
            data.labels.clone(),
            data.classes.clone(),
            data.subjects.clone(),
        )?;
        let svm = train(&reduced, svm, seed)?;
        Ok(LdaSvm { lda, svm })
    }

    pub fn to_text(&self) -> Result<String> {
        let mut w = FlatWriter::new(PIPELINE_MAGIC, FORMAT_VERSION);
        w.field("stages", 2);
        self.lda.write_body(&mut w)?;
        self.svm.write_body(&mut w)?;
        Ok(w.finish())
    }

    pub fn from_text(text: &str) -> Result<LdaSvm> {
        let mut r = FlatReader::new(text, PIPELINE_MAGIC)?;
        check_version(r.version)?;
        if r.parse::<usize>("stages")? != 2 {
            return Err(Error::InvalidModel("pipeline must have two stages".into()));
        }
        let lda = TrainedModel::read_body(&mut r)?;
        let svm = TrainedModel::read_body(&mut r)?;
        r.end()?;
        if lda.kind != ModelKind::Lda
            || svm.kind != ModelKind::Svm
            || svm.dim != lda.classes.len() - 1
            || svm.classes != lda.classes
        {
            return Err(Error::InvalidModel(
                "pipeline stages do not fit together".into(),
            ));
        }
        Ok(LdaSvm { lda, svm })
    }
}

impl Classifier for LdaSvm {
    fn classes(&self) -> &[String] {
        &self.lda.classes
    }

    fn dim(&self) -> usize {
        self.lda.dim
    }

    fn predict_score(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.svm.predict_score(&self.lda.lda_transform(x)?)
    }
}
