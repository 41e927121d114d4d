//! Soft-margin RBF support vector machine, one-vs-one for multiclass.
//!
//! Each binary dual `max Σα − ½ αᵀQα, 0 ≤ α ≤ C, yᵀα = 0` is solved by SMO
//! with second-order working-set selection. Iteration stops when the maximal
//! KKT violation drops below `KKT_TOL` or after `MAX_PASSES · n` updates, in
//! which case the machine is kept and flagged as not converged.

use serde::{Deserialize, Serialize};

use super::Classify;
use crate::error::{Error, Result};
use crate::linalg::{gemm, sq_dist, View};
use crate::matrix::FeatureMatrix;
use crate::spectrum::QualityClass;

pub const KKT_TOL: f64 = 1e-3;
pub const MAX_PASSES: usize = 10_000;
const TAU: f64 = 1e-12;

/// Default RBF width: `1 / (d · mean per-feature variance)`, or 1 for constant data.
pub fn default_gamma(x: &FeatureMatrix) -> f64 {
    let (n, d) = (x.n_rows() as f64, x.n_cols());
    let mut mean = vec![0.0; d];
    for r in x.rows() {
        mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut ss = 0.0;
    for r in x.rows() {
        ss += r.iter().zip(&mean).map(|(v, m)| (v - m) * (v - m)).sum::<f64>();
    }
    let mean_var = ss / (n * d as f64);
    if mean_var > 0.0 {
        1.0 / (d as f64 * mean_var)
    } else {
        1.0
    }
}

/// Full RBF kernel matrix for the rows of `x`, row-major n×n.
pub fn rbf_gram(x: &FeatureMatrix, gamma: f64) -> Vec<f64> {
    let (n, d) = (x.n_rows(), x.n_cols());
    let mut k = vec![0.0; n * n];
    gemm(View::rm(x.data(), n, d), View::rm(x.data(), n, d).t(), 0.0, &mut k);
    let norms: Vec<f64> = (0..n).map(|i| k[i * n + i]).collect();
    for i in 0..n {
        for j in 0..n {
            let d2 = if i == j { 0.0 } else { (norms[i] + norms[j] - 2.0 * k[i * n + j]).max(0.0) };
            k[i * n + j] = (-gamma * d2).exp();
        }
    }
    k
}

/// Solution of one binary dual problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision is `Σ αᵢ yᵢ K(xᵢ, x) − rho`.
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Dual objective `Σα − ½ αᵀQα` with `Q_ij = yᵢyⱼK_ij`.
pub fn dual_objective(kernel: &[f64], y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel[i * n + j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// SMO on a dense kernel matrix (row-major n×n) with labels ±1.
pub fn solve_dual(kernel: &[f64], y: &[f64], c: f64, tol: f64, max_iter: usize) -> DualSolution {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i * n + j];
    let mut alpha = vec![0.0; n];
    // Gradient of the minimization form ½αᵀQα − eᵀα.
    let mut grad = vec![-1.0; n];
    let up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i_sel = t;
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j_sel = usize::MAX;
        let mut best_obj = f64::INFINITY;
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            if i_sel != usize::MAX && v < gmax {
                let b = gmax - v;
                let mut a = kernel[i_sel * n + i_sel] + kernel[t * n + t] - 2.0 * kernel[i_sel * n + t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj < best_obj {
                    best_obj = obj;
                    j_sel = t;
                }
            }
        }
        if i_sel == usize::MAX || j_sel == usize::MAX || gmax - gmin < tol {
            converged = true;
            break;
        }
        let (i, j) = (i_sel, j_sel);
        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_ai, alpha[j] - old_aj);
        for t in 0..n {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
        iterations += 1;
    }

    // Offset from free multipliers, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    DualSolution {
        alpha,
        rho,
        iterations,
        converged,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    /// Class voted for when the decision value is ≥ 0.
    pub positive: QualityClass,
    pub negative: QualityClass,
    /// Row-major support vectors.
    pub support: Vec<f64>,
    /// `αᵢ yᵢ` per support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
    pub converged: bool,
}

impl BinaryMachine {
    pub fn decision(&self, x: &[f64], gamma: f64) -> f64 {
        let d = x.len();
        self.support
            .chunks_exact(d)
            .zip(&self.coef)
            .map(|(sv, a)| a * (-gamma * sq_dist(sv, x)).exp())
            .sum::<f64>()
            - self.rho
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub n_features: usize,
    pub c: f64,
    pub gamma: f64,
    pub machines: Vec<BinaryMachine>,
    /// False if any binary problem hit the iteration cap.
    pub converged: bool,
}

pub fn fit(train: &FeatureMatrix, c: f64, gamma: Option<f64>) -> Result<SvmModel> {
    if !(c > 0.0) {
        return Err(Error::invalid("C must be positive"));
    }
    let classes = train.present_classes();
    if classes.len() < 2 {
        return Err(Error::degenerate("SVM needs at least two classes"));
    }
    let gamma = gamma.unwrap_or_else(|| default_gamma(train));
    let n = train.n_rows();
    let d = train.n_cols();
    let full = rbf_gram(train, gamma);
    let mut machines = Vec::new();
    for (a, &pos) in classes.iter().enumerate() {
        for &neg in &classes[a + 1..] {
            let idx: Vec<usize> = (0..n)
                .filter(|&i| train.labels()[i] == pos || train.labels()[i] == neg)
                .collect();
            let m = idx.len();
            let y: Vec<f64> = idx
                .iter()
                .map(|&i| if train.labels()[i] == pos { 1.0 } else { -1.0 })
                .collect();
            let mut kernel = vec![0.0; m * m];
            for (r, &i) in idx.iter().enumerate() {
                for (s, &j) in idx.iter().enumerate() {
                    kernel[r * m + s] = full[i * n + j];
                }
            }
            let sol = solve_dual(&kernel, &y, c, KKT_TOL, MAX_PASSES.saturating_mul(m.max(1)));
            let mut support = Vec::new();
            let mut coef = Vec::new();
            for (r, &i) in idx.iter().enumerate() {
                if sol.alpha[r] > 0.0 {
                    support.extend_from_slice(train.row(i));
                    coef.push(sol.alpha[r] * y[r]);
                }
            }
            machines.push(BinaryMachine {
                positive: pos,
                negative: neg,
                support,
                coef,
                rho: sol.rho,
                converged: sol.converged,
            });
        }
    }
    let converged = machines.iter().all(|m| m.converged);
    debug_assert!(machines.iter().all(|m| m.support.len() % d == 0));
    Ok(SvmModel {
        n_features: d,
        c,
        gamma,
        machines,
        converged,
    })
}

impl Classify for SvmModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn decide(&self, x: &[f64]) -> QualityClass {
        let mut votes = [0usize; 3];
        for m in &self.machines {
            let winner = if m.decision(x, self.gamma) >= 0.0 { m.positive } else { m.negative };
            votes[winner.index()] += 1;
        }
        super::majority(&votes)
    }
}
