//! The learning-algorithm zoo used for target and shadow models.
//!
//! Every algorithm trains through [`train`] and exposes the same black-box
//! surface afterwards: deterministic hard predictions plus recorded
//! training diagnostics. Classification covers all six algorithms;
//! regression is supported by the boosted trees and the perceptron.
//! Hyperparameter defaults live on the per-algorithm parameter records;
//! where the underlying experiments leaned on library defaults, the values
//! here are our fixed, documented stand-ins.

mod bayes;
mod boost;
mod forest;
mod linear;
mod mlp;
mod tree;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, TaskKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DtParams {
    pub max_depth: usize,
}

impl Default for DtParams {
    fn default() -> Self {
        DtParams { max_depth: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogitParams {
    pub l2: f64,
}

impl Default for LogitParams {
    fn default() -> Self {
        LogitParams { l2: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GnbParams {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfParams {
    pub n_trees: usize,
    pub max_depth: usize,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            n_trees: 50,
            max_depth: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbmParams {
    pub rounds: usize,
    pub depth: usize,
    pub learning_rate: f64,
}

impl Default for GbmParams {
    fn default() -> Self {
        GbmParams {
            rounds: 100,
            depth: 3,
            learning_rate: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden: usize,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 32,
            epochs: 100,
            batch: 32,
            learning_rate: 1e-3,
        }
    }
}

/// Algorithm choice plus its hyperparameter record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Dt(DtParams),
    Logit(LogitParams),
    Gnb(GnbParams),
    Rf(RfParams),
    Gbm(GbmParams),
    Mlp(MlpParams),
}

/// The six algorithm names, in canonical order.
pub const ALGORITHM_NAMES: [&str; 6] = ["dt", "logit", "gnb", "rf", "gbm", "mlp"];

impl AlgorithmSpec {
    /// Default-hyperparameter spec for a named algorithm.
    pub fn by_name(name: &str) -> Result<AlgorithmSpec> {
        match name {
            "dt" => Ok(AlgorithmSpec::Dt(DtParams::default())),
            "logit" => Ok(AlgorithmSpec::Logit(LogitParams::default())),
            "gnb" => Ok(AlgorithmSpec::Gnb(GnbParams::default())),
            "rf" => Ok(AlgorithmSpec::Rf(RfParams::default())),
            "gbm" => Ok(AlgorithmSpec::Gbm(GbmParams::default())),
            "mlp" => Ok(AlgorithmSpec::Mlp(MlpParams::default())),
            other => Err(Error::UnsupportedAlgorithm(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::Dt(_) => "dt",
            AlgorithmSpec::Logit(_) => "logit",
            AlgorithmSpec::Gnb(_) => "gnb",
            AlgorithmSpec::Rf(_) => "rf",
            AlgorithmSpec::Gbm(_) => "gbm",
            AlgorithmSpec::Mlp(_) => "mlp",
        }
    }

    pub fn supports(&self, task: TaskKind) -> bool {
        match task {
            TaskKind::Classification => true,
            TaskKind::Regression => matches!(self, AlgorithmSpec::Gbm(_) | AlgorithmSpec::Mlp(_)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        match self {
            AlgorithmSpec::Dt(p) if p.max_depth < 1 => bad("dt max_depth must be >= 1"),
            AlgorithmSpec::Logit(p) if p.l2 < 0.0 => bad("logit l2 must be >= 0"),
            AlgorithmSpec::Rf(p) if p.n_trees < 1 => bad("rf n_trees must be >= 1"),
            AlgorithmSpec::Rf(p) if p.max_depth < 1 => bad("rf max_depth must be >= 1"),
            AlgorithmSpec::Gbm(p) if p.depth < 1 => bad("gbm depth must be >= 1"),
            AlgorithmSpec::Gbm(p) if !(p.learning_rate > 0.0) => {
                bad("gbm learning_rate must be > 0")
            }
            AlgorithmSpec::Mlp(p) if p.hidden < 1 => bad("mlp hidden width must be >= 1"),
            AlgorithmSpec::Mlp(p) if p.epochs < 1 => bad("mlp epochs must be >= 1"),
            AlgorithmSpec::Mlp(p) if p.batch < 1 => bad("mlp batch must be >= 1"),
            AlgorithmSpec::Mlp(p) if !(p.learning_rate > 0.0) => {
                bad("mlp learning_rate must be > 0")
            }
            _ => Ok(()),
        }
    }
}

/// A fully specified training job: algorithm, hyperparameters and seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerSpec {
    pub algorithm: AlgorithmSpec,
    pub seed: u64,
}

impl LearnerSpec {
    pub fn new(algorithm: AlgorithmSpec, seed: u64) -> Self {
        LearnerSpec { algorithm, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainDiagnostics {
    /// Performance on the training set itself: accuracy for
    /// classification, mean squared error for regression.
    pub train_performance: f64,
    pub converged: bool,
}

enum ModelKind {
    Constant(f64),
    Tree(tree::Tree),
    Logit(linear::LogitModel),
    Gnb(bayes::GnbModel),
    Forest(forest::ForestModel),
    Gbm(boost::GbmModel),
    Mlp(mlp::MlpModel),
}

/// An immutable trained model queried only through `predict`.
pub struct TrainedModel {
    kind: ModelKind,
    task: TaskKind,
    dim: usize,
    diagnostics: TrainDiagnostics,
}

impl TrainedModel {
    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn diagnostics(&self) -> TrainDiagnostics {
        self.diagnostics
    }

    /// Deterministic hard prediction: a 0/1 label for classification, a
    /// real value for regression.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(match &self.kind {
            ModelKind::Constant(v) => *v,
            ModelKind::Tree(t) => t.predict(x),
            ModelKind::Logit(m) => m.predict(x),
            ModelKind::Gnb(m) => m.predict(x),
            ModelKind::Forest(m) => m.predict(x),
            ModelKind::Gbm(m) => m.predict(x),
            ModelKind::Mlp(m) => m.predict(x),
        })
    }
}

/// Train a model. Single-class classification data degrades to a constant
/// predictor rather than an error.
pub fn train(spec: &LearnerSpec, data: &Dataset) -> Result<TrainedModel> {
    spec.algorithm.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "cannot train {} on an empty dataset",
            spec.algorithm.name()
        )));
    }
    if !spec.algorithm.supports(data.task()) {
        return Err(Error::TaskMismatch(format!(
            "{} does not support {:?}",
            spec.algorithm.name(),
            data.task()
        )));
    }
    let dim = data.dim();
    let task = data.task();
    let rows: Vec<&[f64]> = data.iter().map(|e| e.features.as_slice()).collect();
    let targets: Vec<f64> = data.iter().map(|e| e.label).collect();

    let mut converged = true;
    let kind = if task == TaskKind::Classification && data.distinct_labels().len() < 2 {
        ModelKind::Constant(targets[0])
    } else {
        match spec.algorithm {
            AlgorithmSpec::Dt(p) => {
                let params = tree::TreeParams {
                    max_depth: p.max_depth,
                    feature_subsample: None,
                    min_samples_split: 2,
                };
                ModelKind::Tree(tree::grow(
                    &rows,
                    &targets,
                    dim,
                    tree::Criterion::Gini,
                    &params,
                    None,
                ))
            }
            AlgorithmSpec::Logit(p) => {
                let model = linear::fit_logit(&rows, &targets, dim, p.l2);
                converged = model.converged;
                ModelKind::Logit(model)
            }
            AlgorithmSpec::Gnb(_) => ModelKind::Gnb(bayes::fit_gnb(&rows, &targets, dim)),
            AlgorithmSpec::Rf(p) => ModelKind::Forest(forest::fit_rf(
                &rows,
                &targets,
                dim,
                p.n_trees,
                p.max_depth,
                spec.seed,
            )),
            AlgorithmSpec::Gbm(p) => {
                let loss = match task {
                    TaskKind::Classification => boost::GbmLoss::LogLoss,
                    TaskKind::Regression => boost::GbmLoss::Squared,
                };
                ModelKind::Gbm(boost::fit_gbm(
                    &rows,
                    &targets,
                    dim,
                    p.rounds,
                    p.depth,
                    p.learning_rate,
                    loss,
                ))
            }
            AlgorithmSpec::Mlp(p) => {
                let model = mlp::fit_mlp(
                    &rows,
                    &targets,
                    dim,
                    p.hidden,
                    p.epochs,
                    p.batch,
                    p.learning_rate,
                    task == TaskKind::Classification,
                    spec.seed,
                );
                converged = model.converged;
                ModelKind::Mlp(model)
            }
        }
    };
    let mut model = TrainedModel {
        kind,
        task,
        dim,
        diagnostics: TrainDiagnostics {
            train_performance: 0.0,
            converged,
        },
    };
    model.diagnostics.train_performance = performance(&model, data)?;
    Ok(model)
}

/// Average performance of the model on a dataset: mean 0/1 correctness for
/// classification, mean squared error for regression.
pub fn performance(model: &TrainedModel, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidConfig(
            "performance is undefined on an empty dataset".to_string(),
        ));
    }
    let mut total = 0.0;
    for ex in data.iter() {
        let pred = model.predict(&ex.features)?;
        total += match model.task() {
            TaskKind::Classification => (pred == ex.label) as u8 as f64,
            TaskKind::Regression => (pred - ex.label) * (pred - ex.label),
        };
    }
    Ok(total / data.len() as f64)
}
