#![allow(dead_code)]

use fluorospec::{FeatureMatrix, QualityClass};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub mod reference;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Gaussian blobs: class `c` is shifted by `sep` along feature `c mod d`.
pub fn blobs(seed: u64, per_class: [usize; 3], d: usize, sep: f64) -> FeatureMatrix {
    let mut r = rng(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for c in QualityClass::ALL {
        for _ in 0..per_class[c.index()] {
            let mut row: Vec<f64> = (0..d).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
            row[c.index() % d] += sep;
            rows.push(row);
            labels.push(c);
        }
    }
    FeatureMatrix::from_rows(&rows, &labels).unwrap()
}

/// Small integer-valued features, so that duplicates and ties are common.
pub fn integer_points(seed: u64, n: usize, d: usize, levels: i32) -> FeatureMatrix {
    let mut r = rng(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| r.random_range(0..levels) as f64).collect())
        .collect();
    let mut labels: Vec<QualityClass> = (0..n).map(|_| QualityClass::ALL[r.random_range(0..3)]).collect();
    labels[0] = QualityClass::Evoo;
    labels[1] = QualityClass::Voo;
    FeatureMatrix::from_rows(&rows, &labels).unwrap()
}

pub fn random_vec(seed: u64, n: usize, scale: f64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| scale * r.sample::<f64, _>(StandardNormal)).collect()
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix (row-major).
/// Returns eigenvalues descending and eigenvectors as rows.
pub fn jacobi_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| m[b * n + b].total_cmp(&m[a * n + a]));
    let vals = order.iter().map(|&i| m[i * n + i]).collect();
    let vecs = order.iter().map(|&i| (0..n).map(|k| v[k * n + i]).collect()).collect();
    (vals, vecs)
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x * n + col].abs().total_cmp(&m[y * n + col].abs()))
            .unwrap();
        for k in 0..n {
            m.swap(col * n + k, piv * n + k);
            inv.swap(col * n + k, piv * n + k);
        }
        let p = m[col * n + col];
        for k in 0..n {
            m[col * n + k] /= p;
            inv[col * n + k] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r * n + col];
                for k in 0..n {
                    m[r * n + k] -= f * m[col * n + k];
                    inv[r * n + k] -= f * inv[col * n + k];
                }
            }
        }
    }
    inv
}

/// Solve a dense linear system by Gauss-Jordan.
pub fn solve(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let inv = invert(a, n);
    (0..n).map(|i| (0..n).map(|j| inv[i * n + j] * b[j]).sum()).collect()
}
