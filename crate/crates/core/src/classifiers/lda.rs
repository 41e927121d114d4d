//! Linear discriminant analysis with a pooled, ridge-regularized covariance,
//! and its composition with PCA.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::pca::{self, PcaModel};
use super::Classify;
use crate::error::{Error, Result};
use crate::linalg::{argmax, dot};
use crate::matrix::FeatureMatrix;
use crate::spectrum::QualityClass;

/// Ridge added to the within-class scatter, relative to its mean diagonal.
pub const RIDGE: f64 = 1e-6;

/// Linear discriminants `δ_c(x) = wᶜ·x + b_c` with `wᶜ = Σ⁻¹μ_c`,
/// `b_c = −½ μ_cᵀΣ⁻¹μ_c + ln π_c` and `Σ = (S_w + λI) / (n − K)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub n_features: usize,
    pub classes: Vec<QualityClass>,
    /// Row-major `classes × features`.
    pub coef: Vec<f64>,
    pub intercept: Vec<f64>,
}

pub fn fit(x: &FeatureMatrix) -> Result<LdaModel> {
    let (n, d) = (x.n_rows(), x.n_cols());
    let classes = x.present_classes();
    let k = classes.len();
    if n < QualityClass::COUNT {
        return Err(Error::invalid(format!(
            "LDA needs at least {} rows, got {n}",
            QualityClass::COUNT
        )));
    }
    if k < 2 {
        return Err(Error::degenerate("LDA needs at least two classes"));
    }
    let counts = x.class_counts();
    let mut means = vec![vec![0.0; d]; k];
    let slot = |c: QualityClass| classes.iter().position(|&k| k == c).expect("present class");
    for (r, l) in x.rows().zip(x.labels()) {
        means[slot(*l)].iter_mut().zip(r).for_each(|(m, v)| *m += v);
    }
    for (m, c) in means.iter_mut().zip(&classes) {
        let nc = counts[c.index()] as f64;
        m.iter_mut().for_each(|v| *v /= nc);
    }
    let mut sw = DMatrix::<f64>::zeros(d, d);
    let mut dev = DVector::<f64>::zeros(d);
    for (r, l) in x.rows().zip(x.labels()) {
        let mu = &means[slot(*l)];
        for j in 0..d {
            dev[j] = r[j] - mu[j];
        }
        sw.ger(1.0, &dev, &dev, 1.0);
    }
    let trace = sw.trace();
    let lambda = if trace > 0.0 { RIDGE * trace / d as f64 } else { RIDGE };
    for j in 0..d {
        sw[(j, j)] += lambda;
    }
    let dof = n.saturating_sub(k).max(1) as f64;
    let cov = sw / dof;
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::Numerical("pooled covariance is not positive definite".into()))?;
    let mut coef = Vec::with_capacity(k * d);
    let mut intercept = Vec::with_capacity(k);
    for (m, c) in means.iter().zip(&classes) {
        let w = chol.solve(&DVector::from_column_slice(m));
        let prior = counts[c.index()] as f64 / n as f64;
        intercept.push(-0.5 * dot(w.as_slice(), m) + prior.ln());
        coef.extend_from_slice(w.as_slice());
    }
    Ok(LdaModel {
        n_features: d,
        classes,
        coef,
        intercept,
    })
}

impl LdaModel {
    pub fn discriminants(&self, x: &[f64]) -> Vec<f64> {
        self.coef
            .chunks_exact(self.n_features)
            .zip(&self.intercept)
            .map(|(w, b)| dot(w, x) + b)
            .collect()
    }
}

impl Classify for LdaModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn decide(&self, x: &[f64]) -> QualityClass {
        self.classes[argmax(&self.discriminants(x))]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaLdaModel {
    pub pca: PcaModel,
    pub lda: LdaModel,
}

pub fn fit_pca_lda(x: &FeatureMatrix, n_components: usize) -> Result<PcaLdaModel> {
    let pca = pca::fit(x, n_components)?;
    lda_on_pca(x, pca)
}

/// Fit LDA on the projection of `x` through an already-fitted PCA.
pub fn lda_on_pca(x: &FeatureMatrix, pca: PcaModel) -> Result<PcaLdaModel> {
    let projected = FeatureMatrix::new(
        pca.transform_matrix(x),
        pca.n_components(),
        x.labels().to_vec(),
        x.sample_ids().to_vec(),
    )?;
    let lda = fit(&projected)?;
    Ok(PcaLdaModel { pca, lda })
}

impl Classify for PcaLdaModel {
    fn n_features(&self) -> usize {
        self.pca.n_features()
    }

    fn decide(&self, x: &[f64]) -> QualityClass {
        self.lda.decide(&self.pca.transform(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use QualityClass::*;

    #[test]
    fn symmetric_two_class_boundary_is_the_midpoint() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (cx, l) in [(-3.0, Evoo), (3.0, Voo)] {
            for (dx, dy) in [(0.5, 0.0), (-0.5, 0.0), (0.0, 0.5), (0.0, -0.5)] {
                rows.push(vec![cx + dx, dy]);
                labels.push(l);
            }
        }
        let m = fit(&FeatureMatrix::from_rows(&rows, &labels).unwrap()).unwrap();
        let disc = m.discriminants(&[0.0, 0.0]);
        assert!((disc[0] - disc[1]).abs() < 1e-9);
        assert_eq!(m.decide(&[0.0, 0.0]), Evoo);
        assert_eq!(m.decide(&[0.01, 0.0]), Voo);
        assert_eq!(m.decide(&[-0.01, 0.3]), Evoo);
    }

    #[test]
    fn rejects_fewer_rows_than_classes() {
        let two = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0]], &[Evoo, Voo]).unwrap();
        assert!(matches!(fit(&two), Err(Error::InvalidInput(_))));
        let three = FeatureMatrix::from_rows(&[vec![0.0], vec![0.2], vec![1.0]], &[Evoo, Evoo, Voo]).unwrap();
        assert!(fit(&three).is_ok());
    }
}
