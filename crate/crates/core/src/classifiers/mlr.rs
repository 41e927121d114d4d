//! Multinomial logistic regression with an L2 penalty on the weights.
//!
//! Minimizes `Σᵢ −ln softmax(W xᵢ + b)_{yᵢ} + (λ/2)‖W‖²` (bias unpenalized)
//! with L-BFGS and a backtracking Armijo line search, so every accepted
//! iteration strictly decreases the objective.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::Classify;
use crate::error::Result;
use crate::linalg::{argmax, dot, gemm, View};
use crate::matrix::FeatureMatrix;
use crate::spectrum::QualityClass;

pub const GRAD_TOL: f64 = 1e-6;
pub const MAX_ITER: usize = 10_000;
const MEMORY: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlrModel {
    pub n_features: usize,
    pub classes: Vec<QualityClass>,
    /// Row-major `classes × features`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_grad_norm: f64,
    /// Objective after each accepted iteration, starting with the initial point.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_trace: Vec<f64>,
}

struct Problem<'a> {
    x: &'a FeatureMatrix,
    y: Vec<usize>,
    k: usize,
    l2: f64,
}

impl Problem<'_> {
    fn n_params(&self) -> usize {
        self.k * self.x.n_cols() + self.k
    }

    /// Objective value and gradient at `theta = [W (k×d) | b (k)]`.
    fn eval(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let (n, d, k) = (self.x.n_rows(), self.x.n_cols(), self.k);
        let (w, b) = theta.split_at(k * d);
        let mut logits = vec![0.0; n * k];
        gemm(View::rm(self.x.data(), n, d), View::rm(w, k, d).t(), 0.0, &mut logits);
        let mut f = 0.0;
        for (i, row) in logits.chunks_exact_mut(k).enumerate() {
            for (z, bj) in row.iter_mut().zip(b) {
                *z += bj;
            }
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + row.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
            f += lse - row[self.y[i]];
            // Residual P − Y, reused as the gradient of the data term w.r.t. the logits.
            for z in row.iter_mut() {
                *z = (*z - lse).exp();
            }
            row[self.y[i]] -= 1.0;
        }
        let (gw, gb) = grad.split_at_mut(k * d);
        gemm(View::rm(&logits, n, k).t(), View::rm(self.x.data(), n, d), 0.0, gw);
        for (g, wv) in gw.iter_mut().zip(w) {
            *g += self.l2 * wv;
        }
        gb.iter_mut().for_each(|g| *g = 0.0);
        for row in logits.chunks_exact(k) {
            for (g, r) in gb.iter_mut().zip(row) {
                *g += r;
            }
        }
        f + 0.5 * self.l2 * dot(w, w)
    }
}

pub fn fit(train: &FeatureMatrix, l2: f64) -> Result<MlrModel> {
    fit_with(train, l2, GRAD_TOL, MAX_ITER, false)
}

/// Fit with explicit stopping rules; `trace` records the objective per accepted iteration.
pub fn fit_with(
    train: &FeatureMatrix,
    l2: f64,
    grad_tol: f64,
    max_iter: usize,
    trace: bool,
) -> Result<MlrModel> {
    let classes = train.present_classes();
    let y = train
        .labels()
        .iter()
        .map(|l| classes.iter().position(|c| c == l).expect("present class"))
        .collect();
    let p = Problem {
        x: train,
        y,
        k: classes.len(),
        l2,
    };
    let np = p.n_params();
    let mut theta = vec![0.0; np];
    let mut grad = vec![0.0; np];
    let mut f = p.eval(&theta, &mut grad);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut objective_trace = if trace { vec![f] } else { Vec::new() };
    let mut iterations = 0;
    let mut gnorm = dot(&grad, &grad).sqrt();
    let mut new_grad = vec![0.0; np];
    let mut candidate = vec![0.0; np];

    while gnorm >= grad_tol && iterations < max_iter {
        // Two-loop recursion for the quasi-Newton direction.
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, yv, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(yv).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, yv, _)) = history.back() {
            let gamma = dot(s, yv) / dot(yv, yv);
            q.iter_mut().for_each(|v| *v *= gamma);
        } else {
            let scale = 1.0 / gnorm.max(1.0);
            q.iter_mut().for_each(|v| *v *= scale);
        }
        for ((s, yv, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let bcoef = rho * dot(yv, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - bcoef) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&grad, &dir);
        if slope >= 0.0 {
            history.clear();
            dir = grad.iter().map(|g| -g / gnorm.max(1.0)).collect();
            slope = dot(&grad, &dir);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            candidate
                .iter_mut()
                .zip(&theta)
                .zip(&dir)
                .for_each(|((c, t), dv)| *c = t + step * dv);
            let fc = p.eval(&candidate, &mut new_grad);
            if fc.is_finite() && fc <= f + 1e-4 * step * slope && fc < f {
                accepted = Some(fc);
                break;
            }
            step *= 0.5;
        }
        let Some(fc) = accepted else {
            break;
        };
        let s: Vec<f64> = candidate.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        if sy > 1e-12 * dot(&yv, &yv).sqrt() * dot(&s, &s).sqrt() {
            if history.len() == MEMORY {
                history.pop_front();
            }
            history.push_back((s, yv, 1.0 / sy));
        }
        std::mem::swap(&mut theta, &mut candidate);
        std::mem::swap(&mut grad, &mut new_grad);
        f = fc;
        gnorm = dot(&grad, &grad).sqrt();
        iterations += 1;
        if trace {
            objective_trace.push(f);
        }
    }

    let d = train.n_cols();
    let k = classes.len();
    let bias = theta[k * d..].to_vec();
    theta.truncate(k * d);
    Ok(MlrModel {
        n_features: d,
        classes,
        weights: theta,
        bias,
        iterations,
        converged: gnorm < grad_tol,
        final_grad_norm: gnorm,
        objective_trace,
    })
}

impl MlrModel {
    pub fn zeros(n_features: usize) -> Self {
        Self {
            n_features,
            classes: QualityClass::ALL.to_vec(),
            weights: vec![0.0; 3 * n_features],
            bias: vec![0.0; 3],
            iterations: 0,
            converged: false,
            final_grad_norm: f64::NAN,
            objective_trace: Vec::new(),
        }
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.n_features)
            .zip(&self.bias)
            .map(|(w, b)| dot(w, x) + b)
            .collect()
    }

    /// Class probabilities over all three classes (absent classes get 0).
    pub fn probabilities(&self, x: &[f64]) -> [f64; 3] {
        let z = self.logits(x);
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = z.iter().map(|v| (v - max).exp()).sum();
        let mut p = [0.0; 3];
        for (c, zi) in self.classes.iter().zip(&z) {
            p[c.index()] = (zi - max).exp() / s;
        }
        p
    }
}

impl Classify for MlrModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn decide(&self, x: &[f64]) -> QualityClass {
        self.classes[argmax(&self.logits(x))]
    }
}
