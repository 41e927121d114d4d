use serde::{Deserialize, Serialize};

use super::Classify;
use crate::error::{Error, Result};
use crate::linalg::sq_dist;
use crate::matrix::FeatureMatrix;
use crate::spectrum::QualityClass;

/// Lazy k-nearest-neighbour classifier (Euclidean distance, majority vote).
///
/// Neighbours are ordered by (distance, training index). A vote tie between
/// classes goes to the tied class whose member is nearest to the query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub n_features: usize,
    pub rows: Vec<f64>,
    pub labels: Vec<QualityClass>,
}

impl KnnModel {
    pub fn fit(train: &FeatureMatrix, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if train.is_empty() {
            return Err(Error::invalid("training set is empty"));
        }
        Ok(Self {
            k,
            n_features: train.n_cols(),
            rows: train.data().to_vec(),
            labels: train.labels().to_vec(),
        })
    }

    /// Indices of the k nearest training rows, nearest first.
    pub fn neighbors(&self, x: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .rows
            .chunks_exact(self.n_features)
            .enumerate()
            .map(|(i, r)| (sq_dist(r, x), i))
            .collect();
        let k = self.k.min(d.len());
        let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, by);
            d.truncate(k);
        }
        d.sort_unstable_by(by);
        d.into_iter().map(|(_, i)| i).collect()
    }
}

impl Classify for KnnModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn decide(&self, x: &[f64]) -> QualityClass {
        let nn = self.neighbors(x);
        let mut votes = [0usize; 3];
        for &i in &nn {
            votes[self.labels[i].index()] += 1;
        }
        let top = *votes.iter().max().expect("three classes");
        nn.iter()
            .map(|&i| self.labels[i])
            .find(|c| votes[c.index()] == top)
            .expect("at least one neighbour")
    }
}
