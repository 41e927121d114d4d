//! Principal component analysis.
//!
//! With fewer rows than features the eigenproblem is solved on the n×n Gram
//! matrix of the centered data and mapped back (`v = Xcᵀu / √λ`); otherwise on
//! the d×d scatter matrix. Components are re-orthonormalized afterwards, so
//! null directions of rank-deficient data still yield an orthonormal basis.
//! Each component is signed so that its largest-magnitude entry is positive.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, gemm, View};
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Row-major `k × d`, orthonormal rows.
    pub components: Vec<f64>,
    pub explained_variances: Vec<f64>,
}

impl PcaModel {
    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.explained_variances.len()
    }

    pub fn component(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.components[i * d..(i + 1) * d]
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        (0..self.n_components())
            .map(|i| dot(self.component(i), &centered))
            .collect()
    }

    pub fn transform_matrix(&self, x: &FeatureMatrix) -> Vec<f64> {
        let (n, d, k) = (x.n_rows(), x.n_cols(), self.n_components());
        let mut centered = x.data().to_vec();
        for row in centered.chunks_exact_mut(d) {
            row.iter_mut().zip(&self.mean).for_each(|(v, m)| *v -= m);
        }
        let mut out = vec![0.0; n * k];
        gemm(View::rm(&centered, n, d), View::rm(&self.components, k, d).t(), 0.0, &mut out);
        out
    }

    /// Keep only the leading `k` components.
    pub fn truncated(&self, k: usize) -> Result<PcaModel> {
        if k == 0 || k > self.n_components() {
            return Err(Error::invalid(format!(
                "cannot keep {k} of {} components",
                self.n_components()
            )));
        }
        Ok(PcaModel {
            mean: self.mean.clone(),
            components: self.components[..k * self.n_features()].to_vec(),
            explained_variances: self.explained_variances[..k].to_vec(),
        })
    }
}

pub fn fit(x: &FeatureMatrix, k: usize) -> Result<PcaModel> {
    let (n, d) = (x.n_rows(), x.n_cols());
    if n < 2 {
        return Err(Error::invalid("PCA needs at least two rows"));
    }
    let max_k = (n - 1).min(d);
    if k == 0 || k > max_k {
        return Err(Error::invalid(format!(
            "component count {k} outside 1..={max_k} for {n} rows × {d} features"
        )));
    }
    let mut mean = vec![0.0; d];
    for r in x.rows() {
        mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut xc = x.data().to_vec();
    for row in xc.chunks_exact_mut(d) {
        row.iter_mut().zip(&mean).for_each(|(v, m)| *v -= m);
    }

    let (eigvals, mut basis) = if n <= d {
        let mut gram = vec![0.0; n * n];
        gemm(View::rm(&xc, n, d), View::rm(&xc, n, d).t(), 0.0, &mut gram);
        let (vals, vecs) = top_eigenpairs(gram, n, k);
        let mut comps = vec![0.0; k * d];
        // v_i = Xcᵀ u_i / √λ_i (normalization is redone below anyway).
        gemm(View::rm(&vecs, k, n), View::rm(&xc, n, d), 0.0, &mut comps);
        for (i, row) in comps.chunks_exact_mut(d).enumerate() {
            let s = vals[i].max(0.0).sqrt();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            }
        }
        (vals, comps)
    } else {
        let mut scatter = vec![0.0; d * d];
        gemm(View::rm(&xc, n, d).t(), View::rm(&xc, n, d), 0.0, &mut scatter);
        top_eigenpairs(scatter, d, k)
    };

    orthonormalize(&mut basis, k, d);
    for row in basis.chunks_exact_mut(d) {
        let lead = row
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bv), (i, &v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) })
            .0;
        if row[lead] < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let explained_variances = eigvals.iter().map(|l| l.max(0.0) / (n - 1) as f64).collect();
    Ok(PcaModel {
        mean,
        components: basis,
        explained_variances,
    })
}

/// Leading `k` eigenpairs of a symmetric row-major `m × m` matrix, eigenvalues descending.
/// Eigenvectors are returned as rows of a `k × m` buffer.
fn top_eigenpairs(sym: Vec<f64>, m: usize, k: usize) -> (Vec<f64>, Vec<f64>) {
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(m, m, &sym));
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let vals = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = vec![0.0; k * m];
    for (r, &i) in order[..k].iter().enumerate() {
        for j in 0..m {
            vecs[r * m + j] = eig.eigenvectors[(j, i)];
        }
    }
    (vals, vecs)
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Rows that collapse
/// (null directions) are replaced by the first standard basis vector that is not
/// already spanned.
fn orthonormalize(rows: &mut [f64], k: usize, d: usize) {
    let mut next_basis = 0;
    for i in 0..k {
        let (done, rest) = rows.split_at_mut(i * d);
        let v = &mut rest[..d];
        let original = dot(v, v).sqrt();
        project_out(v, done, d);
        let mut norm = dot(v, v).sqrt();
        while !(norm > 1e-8 * original.max(1e-300)) || norm < 1e-150 {
            v.iter_mut().for_each(|x| *x = 0.0);
            v[next_basis % d] = 1.0;
            next_basis += 1;
            project_out(v, done, d);
            norm = dot(v, v).sqrt();
            if next_basis > 2 * d {
                break;
            }
        }
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn project_out(v: &mut [f64], done: &[f64], d: usize) {
    for _ in 0..2 {
        for u in done.chunks_exact(d) {
            let c = dot(u, v);
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::QualityClass;

    fn fm(rows: &[Vec<f64>]) -> FeatureMatrix {
        FeatureMatrix::from_rows(rows, &vec![QualityClass::Evoo; rows.len()]).unwrap()
    }

    #[test]
    fn rejects_out_of_range_component_counts() {
        let x = fm(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 2.0, 0.0]]);
        assert!(fit(&x, 0).is_err());
        assert!(fit(&x, 3).is_err());
        assert!(fit(&x, 2).is_ok());
    }

    #[test]
    fn mean_maps_to_origin() {
        let x = fm(&[vec![1.0, 2.0, 0.5], vec![3.0, -1.0, 0.0], vec![0.0, 0.0, 4.0], vec![2.0, 2.0, 2.0]]);
        let m = fit(&x, 2).unwrap();
        for v in m.transform(&m.mean.clone()) {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn both_routes_agree() {
        // 6 rows × 4 features uses the scatter route; 3 rows × 4 features uses the Gram route.
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|i| (0..4).map(|j| ((i * 4 + j) as f64 * 1.37).sin() * (j + 1) as f64).collect())
            .collect();
        let tall = fit(&fm(&rows), 2).unwrap();
        let wide_rows: Vec<Vec<f64>> = rows[..3].to_vec();
        let wide = fit(&fm(&wide_rows), 2).unwrap();
        // Gram route results checked against the scatter route on the same 3 rows via a padded copy.
        let mut padded = wide_rows.clone();
        padded.extend(wide_rows.iter().cloned());
        let twice = fit(&fm(&padded), 2).unwrap();
        for i in 0..2 {
            let c = dot(wide.component(i), twice.component(i)).abs();
            assert!((c - 1.0).abs() < 1e-10, "component {i}: |cos| = {c}");
        }
        assert!(tall.explained_variances[0] >= tall.explained_variances[1]);
    }
}
