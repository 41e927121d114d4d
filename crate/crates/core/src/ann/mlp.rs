use serde::{Deserialize, Serialize};

use super::{relu_inplace, softmax_inplace};
use crate::classifiers::Classify;
use crate::error::{Error, Result};
use crate::linalg::{argmax, gemm, View};
use crate::spectrum::QualityClass;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpArchitecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
}

impl MlpArchitecture {
    pub fn new(input_dim: usize, hidden: Vec<usize>, output_dim: usize) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || hidden.contains(&0) {
            return Err(Error::invalid("layer widths must be at least 1"));
        }
        Ok(Self {
            input_dim,
            hidden,
            output_dim,
        })
    }

    /// `(fan_in, fan_out)` per layer, input to output.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden.len() + 1);
        let mut prev = self.input_dim;
        for &w in self.hidden.iter().chain(std::iter::once(&self.output_dim)) {
            dims.push((prev, w));
            prev = w;
        }
        dims
    }

    pub fn n_params(&self) -> usize {
        self.layer_dims().iter().map(|(i, o)| i * o + o).sum()
    }

    /// Offsets of each layer's weight block (row-major `out × in`) and bias block.
    pub fn offsets(&self) -> Vec<(usize, usize)> {
        let mut at = 0;
        self.layer_dims()
            .iter()
            .map(|&(i, o)| {
                let w = at;
                let b = at + i * o;
                at = b + o;
                (w, b)
            })
            .collect()
    }
}

/// Network parameters stored as one flat vector: per layer, weights then biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub arch: MlpArchitecture,
    pub params: Vec<f64>,
}

/// Per-layer outputs kept for backpropagation. The last entry holds the softmax probabilities.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    pub batch: usize,
    pub activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn probabilities(&self) -> &[f64] {
        self.activations.last().map_or(&[], Vec::as_slice)
    }
}

/// Scratch buffers for [`MlpModel::backward_into`].
#[derive(Debug, Clone, Default)]
pub struct BackwardScratch {
    delta: Vec<f64>,
    next: Vec<f64>,
}

impl MlpModel {
    pub fn zeros(arch: MlpArchitecture) -> Self {
        let n = arch.n_params();
        Self {
            arch,
            params: vec![0.0; n],
        }
    }

    pub fn from_params(arch: MlpArchitecture, params: Vec<f64>) -> Result<Self> {
        if params.len() != arch.n_params() {
            return Err(Error::invalid(format!(
                "{} parameters supplied, architecture needs {}",
                params.len(),
                arch.n_params()
            )));
        }
        Ok(Self { arch, params })
    }

    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (i, o) = self.arch.layer_dims()[l];
        let (w, b) = self.arch.offsets()[l];
        (&self.params[w..w + i * o], &self.params[b..b + o])
    }

    /// Forward pass over a row-major `batch × input_dim` block.
    pub fn forward(&self, x: &[f64], batch: usize) -> ForwardCache {
        let mut cache = ForwardCache::default();
        self.forward_into(x, batch, &mut cache);
        cache
    }

    pub fn forward_into(&self, x: &[f64], batch: usize, cache: &mut ForwardCache) {
        let dims = self.arch.layer_dims();
        let offsets = self.arch.offsets();
        cache.batch = batch;
        cache.activations.resize_with(dims.len(), Vec::new);
        let n_layers = dims.len();
        for (l, (&(fan_in, fan_out), &(wo, bo))) in dims.iter().zip(&offsets).enumerate() {
            let (done, rest) = cache.activations.split_at_mut(l);
            let input: &[f64] = if l == 0 { x } else { &done[l - 1] };
            let out = &mut rest[0];
            out.resize(batch * fan_out, 0.0);
            let w = &self.params[wo..wo + fan_in * fan_out];
            let b = &self.params[bo..bo + fan_out];
            gemm(View::rm(input, batch, fan_in), View::rm(w, fan_out, fan_in).t(), 0.0, out);
            for row in out.chunks_exact_mut(fan_out) {
                row.iter_mut().zip(b).for_each(|(z, bi)| *z += bi);
                if l + 1 == n_layers {
                    softmax_inplace(row);
                } else {
                    relu_inplace(row);
                }
            }
        }
    }

    /// Gradient of the mean categorical cross-entropy with respect to all parameters.
    pub fn backward(&self, x: &[f64], cache: &ForwardCache, labels: &[usize]) -> Vec<f64> {
        let mut grad = vec![0.0; self.params.len()];
        self.backward_into(x, cache, labels, &mut grad, &mut BackwardScratch::default());
        grad
    }

    pub fn backward_into(
        &self,
        x: &[f64],
        cache: &ForwardCache,
        labels: &[usize],
        grad: &mut [f64],
        scratch: &mut BackwardScratch,
    ) {
        let batch = cache.batch;
        assert_eq!(labels.len(), batch, "one label per batch row");
        let dims = self.arch.layer_dims();
        let offsets = self.arch.offsets();
        let n_layers = dims.len();
        let out_dim = self.arch.output_dim;
        let inv = 1.0 / batch as f64;

        let delta = &mut scratch.delta;
        delta.clear();
        delta.extend_from_slice(cache.probabilities());
        for (row, &l) in delta.chunks_exact_mut(out_dim).zip(labels) {
            row[l] -= 1.0;
            row.iter_mut().for_each(|v| *v *= inv);
        }
        for l in (0..n_layers).rev() {
            let (fan_in, fan_out) = dims[l];
            let (wo, bo) = offsets[l];
            let input: &[f64] = if l == 0 { x } else { &cache.activations[l - 1] };
            let (gw, gb) = grad[wo..bo + fan_out].split_at_mut(fan_in * fan_out);
            gemm(View::rm(delta, batch, fan_out).t(), View::rm(input, batch, fan_in), 0.0, gw);
            gb.iter_mut().for_each(|g| *g = 0.0);
            for row in delta.chunks_exact(fan_out) {
                gb.iter_mut().zip(row).for_each(|(g, d)| *g += d);
            }
            if l > 0 {
                let w = &self.params[wo..wo + fan_in * fan_out];
                let next = &mut scratch.next;
                next.resize(batch * fan_in, 0.0);
                gemm(View::rm(delta, batch, fan_out), View::rm(w, fan_out, fan_in), 0.0, next);
                for (g, a) in next.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *g = 0.0;
                    }
                }
                std::mem::swap(delta, next);
            }
        }
    }

    /// Class probabilities for a single input row.
    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x, 1).activations.pop().unwrap_or_default()
    }
}

impl Classify for MlpModel {
    fn n_features(&self) -> usize {
        self.arch.input_dim
    }

    fn decide(&self, x: &[f64]) -> QualityClass {
        let p = self.probabilities(x);
        QualityClass::ALL[argmax(&p[..QualityClass::COUNT.min(p.len())])]
    }
}
