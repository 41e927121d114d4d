use serde::{Deserialize, Serialize};

use super::Classify;
use crate::error::Result;
use crate::matrix::FeatureMatrix;
use crate::spectrum::QualityClass;

/// Relative variance floor: per-class variances are at least this times the largest feature variance.
pub const VAR_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes with per-class, per-feature mean and variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub n_features: usize,
    pub classes: Vec<QualityClass>,
    pub log_priors: Vec<f64>,
    /// Row-major `classes × features`.
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

pub fn fit(train: &FeatureMatrix) -> Result<NbModel> {
    let d = train.n_cols();
    let n = train.n_rows() as f64;
    let classes = train.present_classes();
    let counts = train.class_counts();

    let mut global_mean = vec![0.0; d];
    for r in train.rows() {
        for (m, v) in global_mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    global_mean.iter_mut().for_each(|m| *m /= n);
    let mut global_var = vec![0.0; d];
    for r in train.rows() {
        for ((s, v), m) in global_var.iter_mut().zip(r).zip(&global_mean) {
            *s += (v - m) * (v - m);
        }
    }
    let max_var = global_var.iter().map(|s| s / n).fold(0.0, f64::max);
    let floor = if max_var > 0.0 { VAR_FLOOR * max_var } else { VAR_FLOOR };

    let mut means = vec![0.0; classes.len() * d];
    let mut variances = vec![0.0; classes.len() * d];
    let slot: Vec<Option<usize>> = (0..3)
        .map(|c| classes.iter().position(|k| k.index() == c))
        .collect();
    for (r, l) in train.rows().zip(train.labels()) {
        let k = slot[l.index()].expect("present class");
        for (m, v) in means[k * d..(k + 1) * d].iter_mut().zip(r) {
            *m += v;
        }
    }
    for (k, c) in classes.iter().enumerate() {
        let nc = counts[c.index()] as f64;
        means[k * d..(k + 1) * d].iter_mut().for_each(|m| *m /= nc);
    }
    for (r, l) in train.rows().zip(train.labels()) {
        let k = slot[l.index()].expect("present class");
        let mu = &means[k * d..(k + 1) * d];
        for ((s, v), m) in variances[k * d..(k + 1) * d].iter_mut().zip(r).zip(mu) {
            *s += (v - m) * (v - m);
        }
    }
    for (k, c) in classes.iter().enumerate() {
        let nc = counts[c.index()] as f64;
        variances[k * d..(k + 1) * d]
            .iter_mut()
            .for_each(|s| *s = (*s / nc).max(floor));
    }
    let log_priors = classes
        .iter()
        .map(|c| (counts[c.index()] as f64 / n).ln())
        .collect();
    Ok(NbModel {
        n_features: d,
        classes,
        log_priors,
        means,
        variances,
    })
}

impl NbModel {
    /// Unnormalized log joint `ln p(c) + Σ ln N(x_j; μ_cj, σ²_cj)` per present class.
    pub fn log_joint(&self, x: &[f64]) -> Vec<f64> {
        let d = self.n_features;
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        (0..self.classes.len())
            .map(|k| {
                let mu = &self.means[k * d..(k + 1) * d];
                let var = &self.variances[k * d..(k + 1) * d];
                let ll: f64 = x
                    .iter()
                    .zip(mu)
                    .zip(var)
                    .map(|((v, m), s)| ln_2pi + s.ln() + (v - m) * (v - m) / s)
                    .sum();
                self.log_priors[k] - 0.5 * ll
            })
            .collect()
    }

    /// Posterior over all three classes (absent classes get 0).
    pub fn posterior(&self, x: &[f64]) -> [f64; 3] {
        let lj = self.log_joint(x);
        let max = lj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = lj.iter().map(|v| (v - max).exp()).sum();
        let mut p = [0.0; 3];
        for (k, c) in self.classes.iter().enumerate() {
            p[c.index()] = (lj[k] - max).exp() / z;
        }
        p
    }
}

impl Classify for NbModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn decide(&self, x: &[f64]) -> QualityClass {
        let lj = self.log_joint(x);
        self.classes[crate::linalg::argmax(&lj)]
    }
}
