use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::split::{split_holdout, SplitPlan};
use super::stats::{accuracy, mean_std};
use crate::ann::{self, AdamConfig, MlpArchitecture, MlpModel, TrainConfig};
use crate::classifiers::{self, majority, ClassifierSpec, Classify, TrainedModel};
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::spectrum::QualityClass;

/// Network configuration used by the evaluation protocol. The training seed is
/// supplied per repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub hidden_layers: Vec<usize>,
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_true")]
    pub shuffle: bool,
    #[serde(default)]
    pub adam: AdamConfig,
}

fn default_batch() -> usize {
    ann::train::DEFAULT_BATCH_SIZE
}

fn default_true() -> bool {
    true
}

impl MlpSpec {
    pub fn new(hidden_layers: Vec<usize>, epochs: usize) -> Self {
        Self {
            hidden_layers,
            epochs,
            batch_size: default_batch(),
            shuffle: true,
            adam: AdamConfig::default(),
        }
    }

    /// Three layers of 32 units trained for 1000 epochs.
    pub fn best() -> Self {
        Self::new(vec![32, 32, 32], 1000)
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed,
            shuffle: self.shuffle,
            adam: self.adam,
        }
    }

    pub fn architecture(&self, input_dim: usize) -> Result<MlpArchitecture> {
        MlpArchitecture::new(input_dim, self.hidden_layers.clone(), QualityClass::COUNT)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers.is_empty() || self.hidden_layers.contains(&0) {
            return Err(Error::invalid("hidden layers must be a non-empty list of positive widths"));
        }
        self.train_config(0).validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "spec", rename_all = "snake_case")]
pub enum ModelSpec {
    Classical(ClassifierSpec),
    Mlp(MlpSpec),
}

impl ModelSpec {
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Classical(s) => s.label(),
            ModelSpec::Mlp(_) => "ANN".into(),
        }
    }

    pub fn params(&self) -> BTreeMap<String, serde_json::Value> {
        match self {
            ModelSpec::Classical(s) => s.params(),
            ModelSpec::Mlp(m) => {
                let mut p = BTreeMap::new();
                p.insert("hidden_layers".into(), json!(m.hidden_layers));
                p.insert("epochs".into(), json!(m.epochs));
                p.insert("batch_size".into(), json!(m.batch_size));
                p.insert("optimizer".into(), json!("adam"));
                p.insert("learning_rate".into(), json!(m.adam.learning_rate));
                p
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Classical(s) => s.validate(),
            ModelSpec::Mlp(m) => m.validate(),
        }
    }
}

impl From<ClassifierSpec> for ModelSpec {
    fn from(s: ClassifierSpec) -> Self {
        ModelSpec::Classical(s)
    }
}

impl From<MlpSpec> for ModelSpec {
    fn from(s: MlpSpec) -> Self {
        ModelSpec::Mlp(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "model", rename_all = "snake_case")]
pub enum FittedModel {
    Classical(TrainedModel),
    Mlp(MlpModel),
}

impl Classify for FittedModel {
    fn n_features(&self) -> usize {
        match self {
            FittedModel::Classical(m) => m.n_features(),
            FittedModel::Mlp(m) => m.n_features(),
        }
    }

    fn decide(&self, x: &[f64]) -> QualityClass {
        match self {
            FittedModel::Classical(m) => m.decide(x),
            FittedModel::Mlp(m) => m.decide(x),
        }
    }
}

/// Anything that can be fitted on a training partition with a seed.
pub trait Learner: Sync {
    type Model: Classify;
    fn fit(&self, train: &FeatureMatrix, seed: u64) -> Result<Self::Model>;
}

impl Learner for ClassifierSpec {
    type Model = TrainedModel;
    fn fit(&self, train: &FeatureMatrix, seed: u64) -> Result<TrainedModel> {
        classifiers::fit(self, train, seed)
    }
}

impl Learner for MlpSpec {
    type Model = MlpModel;
    fn fit(&self, train: &FeatureMatrix, seed: u64) -> Result<MlpModel> {
        self.validate()?;
        let arch = self.architecture(train.n_cols())?;
        Ok(ann::train(&arch, &self.train_config(seed), train)?.model)
    }
}

impl Learner for ModelSpec {
    type Model = FittedModel;
    fn fit(&self, train: &FeatureMatrix, seed: u64) -> Result<FittedModel> {
        match self {
            ModelSpec::Classical(s) => s.fit(train, seed).map(FittedModel::Classical),
            ModelSpec::Mlp(m) => m.fit(train, seed).map(FittedModel::Mlp),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatedResult {
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub split_accuracies: Vec<f64>,
}

impl RepeatedResult {
    pub fn from_accuracies(split_accuracies: Vec<f64>) -> Self {
        let (mean_accuracy, std_accuracy) = mean_std(&split_accuracies);
        Self {
            mean_accuracy,
            std_accuracy,
            split_accuracies,
        }
    }
}

/// Score a fitted model on the validation rows of one split.
pub fn score(model: &dyn Classify, d: &FeatureMatrix, validation: &[usize], per_sample_vote: bool) -> Result<f64> {
    let predictions: Vec<QualityClass> = validation.iter().map(|&r| model.decide(d.row(r))).collect();
    let truth: Vec<QualityClass> = validation.iter().map(|&r| d.labels()[r]).collect();
    if !per_sample_vote {
        return accuracy(&predictions, &truth);
    }
    let mut votes: BTreeMap<&str, ([usize; 3], QualityClass)> = BTreeMap::new();
    for ((&r, p), t) in validation.iter().zip(&predictions).zip(&truth) {
        let e = votes.entry(d.sample_ids()[r].as_str()).or_insert(([0; 3], *t));
        e.0[p.index()] += 1;
    }
    let (voted, labels): (Vec<QualityClass>, Vec<QualityClass>) =
        votes.values().map(|(v, t)| (majority(v), *t)).unzip();
    accuracy(&voted, &labels)
}

/// Run the repeated holdout protocol where each repetition fits one training
/// routine that yields `n_outputs` models, all scored on the same split.
/// Repetitions run in parallel; results are in repetition order.
pub fn repeated_eval_multi<F>(d: &FeatureMatrix, plan: &SplitPlan, n_outputs: usize, fit: F) -> Result<Vec<RepeatedResult>>
where
    F: Fn(&FeatureMatrix, u64) -> Result<Vec<Box<dyn Classify + Send>>> + Sync,
{
    plan.validate()?;
    let per_rep: Vec<Vec<f64>> = (0..plan.n_repetitions)
        .into_par_iter()
        .map(|rep| {
            let tag = |e: Error| Error::Repetition {
                index: rep,
                source: Box::new(e),
            };
            let split = split_holdout(d, plan, rep).map_err(tag)?;
            let train = d.select(&split.train);
            let models = fit(&train, plan.fit_seed(rep)).map_err(tag)?;
            if models.len() != n_outputs {
                return Err(tag(Error::invalid(format!(
                    "expected {n_outputs} fitted models, got {}",
                    models.len()
                ))));
            }
            models
                .iter()
                .map(|m| score(m.as_ref(), d, &split.validation, plan.per_sample_vote).map_err(tag))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..n_outputs)
        .map(|o| RepeatedResult::from_accuracies(per_rep.iter().map(|a| a[o]).collect()))
        .collect())
}

/// Mean and population standard deviation of validation accuracy over
/// `plan.n_repetitions` independent holdout splits.
pub fn repeated_eval<L>(learner: &L, d: &FeatureMatrix, plan: &SplitPlan) -> Result<RepeatedResult>
where
    L: Learner,
    L::Model: Send + 'static,
{
    let mut out = repeated_eval_multi(d, plan, 1, |train, seed| {
        let m = learner.fit(train, seed)?;
        Ok(vec![Box::new(m) as Box<dyn Classify + Send>])
    })?;
    Ok(out.remove(0))
}
