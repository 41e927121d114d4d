use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::mlp::{BackwardScratch, ForwardCache, MlpArchitecture, MlpModel};
use super::cross_entropy_indices;
use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::rng::{derived_stream, name_hash};

pub const DEFAULT_BATCH_SIZE: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub shuffle: bool,
    #[serde(default)]
    pub adam: AdamConfig,
}

impl TrainConfig {
    pub fn new(epochs: usize, seed: u64) -> Self {
        Self {
            epochs,
            batch_size: DEFAULT_BATCH_SIZE,
            seed,
            shuffle: true,
            adam: AdamConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        self.adam.validate()
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    /// Full-set loss of the freshly initialized network.
    pub initial_loss: f64,
    /// Mean mini-batch loss of each epoch, measured before each update.
    pub epoch_losses: Vec<f64>,
    /// Copies of the network taken after the requested epochs, in request order.
    pub snapshots: Vec<(usize, MlpModel)>,
}

/// Fan-in scaled uniform weights `U(−√(6/fan_in), √(6/fan_in))`, zero biases.
pub fn initialize(arch: &MlpArchitecture, seed: u64) -> MlpModel {
    let mut rng = derived_stream(seed, &[name_hash("init")]);
    let mut m = MlpModel::zeros(arch.clone());
    for (&(fan_in, fan_out), &(wo, _)) in arch.layer_dims().iter().zip(&arch.offsets()) {
        let limit = (6.0 / fan_in as f64).sqrt();
        for w in &mut m.params[wo..wo + fan_in * fan_out] {
            *w = rng.random_range(-limit..limit);
        }
    }
    m
}

pub fn train(arch: &MlpArchitecture, cfg: &TrainConfig, data: &FeatureMatrix) -> Result<TrainOutcome> {
    train_with_checkpoints(arch, cfg, data, &[])
}

/// Train for `cfg.epochs` epochs, also keeping the network as it was after each
/// epoch count in `checkpoints`. A snapshot at epoch `e` equals the result of a
/// separate run with `epochs = e` and the same seed.
pub fn train_with_checkpoints(
    arch: &MlpArchitecture,
    cfg: &TrainConfig,
    data: &FeatureMatrix,
    checkpoints: &[usize],
) -> Result<TrainOutcome> {
    cfg.validate()?;
    data.check_trainable()?;
    if data.n_cols() != arch.input_dim {
        return Err(Error::invalid(format!(
            "network expects {} inputs, data has {} columns",
            arch.input_dim,
            data.n_cols()
        )));
    }
    if let Some(&e) = checkpoints.iter().find(|&&e| e > cfg.epochs) {
        return Err(Error::invalid(format!("checkpoint {e} beyond {} epochs", cfg.epochs)));
    }
    let (n, d, k) = (data.n_rows(), data.n_cols(), arch.output_dim);
    let labels: Vec<usize> = data.labels().iter().map(|l| l.index()).collect();
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::invalid(format!("label index {bad} exceeds {k} outputs")));
    }

    let mut model = initialize(arch, cfg.seed);
    let mut cache = ForwardCache::default();
    model.forward_into(data.data(), n, &mut cache);
    let initial_loss = cross_entropy_indices(cache.probabilities(), &labels, k);

    let mut snapshots: Vec<(usize, MlpModel)> = Vec::with_capacity(checkpoints.len());
    let take = |epoch: usize, m: &MlpModel, snaps: &mut Vec<(usize, MlpModel)>| {
        for &c in checkpoints.iter().filter(|&&c| c == epoch) {
            snaps.push((c, m.clone()));
        }
    };
    take(0, &model, &mut snapshots);

    let mut adam = AdamState::new(model.params.len(), cfg.adam);
    let mut shuffle_rng = derived_stream(cfg.seed, &[name_hash("shuffle")]);
    let mut order: Vec<usize> = (0..n).collect();
    let mut xb = Vec::with_capacity(cfg.batch_size * d);
    let mut yb = Vec::with_capacity(cfg.batch_size);
    let mut grad = vec![0.0; model.params.len()];
    let mut scratch = BackwardScratch::default();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut shuffle_rng);
        }
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            xb.clear();
            yb.clear();
            for &i in chunk {
                xb.extend_from_slice(data.row(i));
                yb.push(labels[i]);
            }
            model.forward_into(&xb, chunk.len(), &mut cache);
            total += cross_entropy_indices(cache.probabilities(), &yb, k) * chunk.len() as f64;
            model.backward_into(&xb, &cache, &yb, &mut grad, &mut scratch);
            adam.step(&mut model.params, &grad)?;
        }
        let loss = total / n as f64;
        if !loss.is_finite() || !model.params.iter().all(|p| p.is_finite()) {
            return Err(Error::Numerical(format!(
                "training diverged at epoch {epoch} (loss {loss}); check learning rate and input scaling"
            )));
        }
        epoch_losses.push(loss);
        take(epoch, &model, &mut snapshots);
    }
    snapshots.sort_by_key(|(e, _)| checkpoints.iter().position(|c| c == e));
    Ok(TrainOutcome {
        model,
        initial_loss,
        epoch_losses,
        snapshots,
    })
}
