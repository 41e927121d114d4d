//! Brute-force and closed-form reference classifiers, written independently of the library.

use std::cmp::Ordering;

use fluorospec::{FeatureMatrix, QualityClass};

use super::{invert, jacobi_eigen};

/// Full distance sort with index tie-break; vote ties go to the class of the nearest tied neighbour.
pub fn knn(train: &FeatureMatrix, k: usize, x: &[f64]) -> QualityClass {
    let mut all: Vec<(f64, usize)> = (0..train.n_rows())
        .map(|i| {
            let mut s = 0.0;
            for (a, b) in train.row(i).iter().zip(x) {
                s += (a - b) * (a - b);
            }
            (s, i)
        })
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let nearest = &all[..k.min(all.len())];
    let mut votes = [0; 3];
    for &(_, i) in nearest {
        votes[train.labels()[i].index()] += 1;
    }
    let top = *votes.iter().max().unwrap();
    nearest
        .iter()
        .map(|&(_, i)| train.labels()[i])
        .find(|c| votes[c.index()] == top)
        .unwrap()
}

/// Exact non-negative fraction.
#[derive(Clone, Copy, Debug)]
pub struct Frac(pub u128, pub u128);

impl Frac {
    pub fn add(self, o: Frac) -> Frac {
        Frac(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }

    pub fn cmp(self, o: Frac) -> Ordering {
        (self.0 * o.1).cmp(&(o.0 * self.1))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

/// Gini impurity `1 − Σ c²/n²` as an exact fraction.
pub fn gini(counts: [u128; 3]) -> Frac {
    let n: u128 = counts.iter().sum();
    let sq: u128 = counts.iter().map(|c| c * c).sum();
    Frac(n * n - sq, n * n)
}

/// `n·G` of a node: `n − Σ c²/n`.
pub fn weighted_gini(counts: [u128; 3]) -> Frac {
    let n: u128 = counts.iter().sum();
    let sq: u128 = counts.iter().map(|c| c * c).sum();
    Frac(n * n - sq, n)
}

pub enum Tree {
    Leaf(QualityClass),
    Split(usize, f64, Box<Tree>, Box<Tree>),
}

/// Exhaustive CART: every feature, every midpoint, exact weighted Gini,
/// ties to the lowest feature then the lowest threshold.
pub fn cart(x: &FeatureMatrix, idx: &[usize]) -> Tree {
    let mut counts = [0u128; 3];
    for &i in idx {
        counts[x.labels()[i].index()] += 1;
    }
    let top = *counts.iter().max().unwrap();
    let leaf = QualityClass::ALL[counts.iter().position(|&c| c == top).unwrap()];
    if counts.iter().filter(|&&c| c > 0).count() <= 1 {
        return Tree::Leaf(leaf);
    }
    let mut best: Option<(Frac, usize, f64)> = None;
    for f in 0..x.n_cols() {
        let mut values: Vec<f64> = idx.iter().map(|&i| x.row(i)[f]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for w in values.windows(2) {
            let thr = (w[0] + w[1]) / 2.0;
            let mut l = [0u128; 3];
            let mut r = [0u128; 3];
            for &i in idx {
                let side = if x.row(i)[f] <= thr { &mut l } else { &mut r };
                side[x.labels()[i].index()] += 1;
            }
            let cost = weighted_gini(l).add(weighted_gini(r));
            let better = match best {
                None => true,
                Some((b, bf, bt)) => match cost.cmp(b) {
                    Ordering::Less => true,
                    Ordering::Equal => (f, thr) < (bf, bt),
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((cost, f, thr));
            }
        }
    }
    let Some((_, f, thr)) = best else {
        return Tree::Leaf(leaf);
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x.row(i)[f] <= thr);
    Tree::Split(f, thr, Box::new(cart(x, &l)), Box::new(cart(x, &r)))
}

pub fn tree_predict(t: &Tree, x: &[f64]) -> QualityClass {
    match t {
        Tree::Leaf(c) => *c,
        Tree::Split(f, thr, l, r) => tree_predict(if x[*f] <= *thr { l } else { r }, x),
    }
}

/// Top-`k` eigenpairs of the sample covariance by Jacobi rotation.
/// Components are sign-normalized so their largest-magnitude entry is positive.
pub fn pca(x: &FeatureMatrix, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (n, d) = (x.n_rows(), x.n_cols());
    let mut mean = vec![0.0; d];
    for r in x.rows() {
        for j in 0..d {
            mean[j] += r[j] / n as f64;
        }
    }
    let mut cov = vec![0.0; d * d];
    for r in x.rows() {
        for a in 0..d {
            for b in 0..d {
                cov[a * d + b] += (r[a] - mean[a]) * (r[b] - mean[b]) / (n - 1) as f64;
            }
        }
    }
    let (vals, mut vecs) = jacobi_eigen(&cov, d);
    for v in &mut vecs {
        sign_normalize(v);
    }
    (vals[..k].to_vec(), vecs[..k].to_vec())
}

pub fn sign_normalize(v: &mut [f64]) {
    let lead = (0..v.len()).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap();
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|e| *e = -*e);
    }
}

/// Linear discriminants `(class, w, b)` with pooled covariance `(S_w + λI)/(n − K)`,
/// `λ = 1e-6 · trace(S_w)/d`, and log-prior offsets.
pub fn lda(x: &FeatureMatrix) -> Vec<(QualityClass, Vec<f64>, f64)> {
    let (n, d) = (x.n_rows(), x.n_cols());
    let classes: Vec<QualityClass> = QualityClass::ALL
        .into_iter()
        .filter(|c| x.labels().contains(c))
        .collect();
    let mut means = Vec::new();
    for &c in &classes {
        let rows: Vec<&[f64]> = x.rows().zip(x.labels()).filter(|(_, l)| **l == c).map(|(r, _)| r).collect();
        let mu: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64).collect();
        means.push((c, mu, rows.len()));
    }
    let mut sw = vec![0.0; d * d];
    for (r, l) in x.rows().zip(x.labels()) {
        let mu = &means.iter().find(|m| m.0 == *l).unwrap().1;
        for a in 0..d {
            for b in 0..d {
                sw[a * d + b] += (r[a] - mu[a]) * (r[b] - mu[b]);
            }
        }
    }
    let trace: f64 = (0..d).map(|j| sw[j * d + j]).sum();
    let ridge = 1e-6 * trace / d as f64;
    let dof = (n - classes.len()) as f64;
    let cov: Vec<f64> = (0..d * d)
        .map(|i| (sw[i] + if i % (d + 1) == 0 { ridge } else { 0.0 }) / dof)
        .collect();
    let inv = invert(&cov, d);
    means
        .into_iter()
        .map(|(c, mu, nc)| {
            let w: Vec<f64> = (0..d).map(|a| (0..d).map(|b| inv[a * d + b] * mu[b]).sum()).collect();
            let b = -0.5 * w.iter().zip(&mu).map(|(p, q)| p * q).sum::<f64>() + (nc as f64 / n as f64).ln();
            (c, w, b)
        })
        .collect()
}

pub fn lda_scores(model: &[(QualityClass, Vec<f64>, f64)], x: &[f64]) -> Vec<f64> {
    model
        .iter()
        .map(|(_, w, b)| w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b)
        .collect()
}

/// Gaussian naive Bayes log-joint per class, population variances floored at
/// `floor_factor · max feature variance`.
pub fn nb_log_joint(x: &FeatureMatrix, floor_factor: f64, p: &[f64]) -> Vec<f64> {
    let (n, d) = (x.n_rows(), x.n_cols());
    let col_var = |j: usize| {
        let m = x.rows().map(|r| r[j]).sum::<f64>() / n as f64;
        x.rows().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n as f64
    };
    let floor = floor_factor * (0..d).map(col_var).fold(0.0, f64::max);
    QualityClass::ALL
        .into_iter()
        .map(|c| {
            let rows: Vec<&[f64]> = x.rows().zip(x.labels()).filter(|(_, l)| **l == c).map(|(r, _)| r).collect();
            let nc = rows.len() as f64;
            let mut lj = (nc / n as f64).ln();
            for j in 0..d {
                let mu = rows.iter().map(|r| r[j]).sum::<f64>() / nc;
                let var = (rows.iter().map(|r| (r[j] - mu).powi(2)).sum::<f64>() / nc).max(floor);
                lj += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (p[j] - mu).powi(2) / (2.0 * var);
            }
            lj
        })
        .collect()
}

/// First maximum, matching the library's class-order tie-break.
pub fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
}
