//! Feed-forward network classifier: ReLU hidden layers, softmax output,
//! categorical cross-entropy, Adam.

pub mod adam;
pub mod grid;
pub mod mlp;
pub mod train;

pub use adam::{AdamConfig, AdamState};
pub use grid::{grid_search, plot_data, GridCell, GridSpec};
pub use mlp::{ForwardCache, MlpArchitecture, MlpModel};
pub use train::{train, train_with_checkpoints, TrainConfig, TrainOutcome};

use crate::error::{Error, Result};

/// Probability floor used inside the logarithm of the loss.
pub const PROB_CLAMP: f64 = 1e-12;

pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

pub fn relu_inplace(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = relu(*x));
}

/// Max-shifted softmax of one logit row, written in place.
pub fn softmax_inplace(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        s += *v;
    }
    z.iter_mut().for_each(|v| *v /= s);
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut z = logits.to_vec();
    softmax_inplace(&mut z);
    z
}

/// Mean over the batch of `−Σ_j y_j ln max(ŷ_j, PROB_CLAMP)`.
/// `probs` and `one_hot` are row-major `batch × n_classes`.
pub fn cross_entropy(probs: &[f64], one_hot: &[f64], n_classes: usize) -> Result<f64> {
    if n_classes == 0 || probs.len() != one_hot.len() || probs.len() % n_classes != 0 || probs.is_empty() {
        return Err(Error::invalid(format!(
            "cross-entropy shape mismatch: {} probabilities, {} targets, {n_classes} classes",
            probs.len(),
            one_hot.len()
        )));
    }
    let batch = probs.len() / n_classes;
    let total: f64 = probs
        .iter()
        .zip(one_hot)
        .map(|(p, y)| if *y == 0.0 { 0.0 } else { -y * p.max(PROB_CLAMP).ln() })
        .sum();
    Ok(total / batch as f64)
}

/// Cross-entropy against class indices.
pub(crate) fn cross_entropy_indices(probs: &[f64], labels: &[usize], n_classes: usize) -> f64 {
    let total: f64 = probs
        .chunks_exact(n_classes)
        .zip(labels)
        .map(|(row, &l)| -row[l].max(PROB_CLAMP).ln())
        .sum();
    total / labels.len() as f64
}
