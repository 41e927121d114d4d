use crate::error::{Error, Result};
use crate::spectrum::QualityClass;

/// Row-major design matrix with one label and one sample id per row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    n_cols: usize,
    labels: Vec<QualityClass>,
    sample_ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        data: Vec<f64>,
        n_cols: usize,
        labels: Vec<QualityClass>,
        sample_ids: Vec<String>,
    ) -> Result<Self> {
        if n_cols == 0 {
            return Err(Error::invalid("feature matrix needs at least one column"));
        }
        if data.len() % n_cols != 0 {
            return Err(Error::invalid(format!(
                "{} values do not fill rows of {n_cols} columns",
                data.len()
            )));
        }
        let n = data.len() / n_cols;
        if labels.len() != n || sample_ids.len() != n {
            return Err(Error::invalid(format!(
                "{n} rows but {} labels and {} sample ids",
                labels.len(),
                sample_ids.len()
            )));
        }
        Ok(Self {
            data,
            n_cols,
            labels,
            sample_ids,
        })
    }

    /// Build from rows and labels; each row gets its own index as sample id.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[QualityClass]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::invalid("rows have differing lengths"));
        }
        let data = rows.iter().flatten().copied().collect();
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(data, n_cols, labels.to_vec(), ids)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn labels(&self) -> &[QualityClass] {
        &self.labels
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    /// Copy of the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            data,
            n_cols: self.n_cols,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            sample_ids: indices.iter().map(|&i| self.sample_ids[i].clone()).collect(),
        }
    }

    pub fn class_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for l in &self.labels {
            c[l.index()] += 1;
        }
        c
    }

    /// Classes with at least one row, in class order.
    pub fn present_classes(&self) -> Vec<QualityClass> {
        let counts = self.class_counts();
        QualityClass::ALL
            .into_iter()
            .filter(|c| counts[c.index()] > 0)
            .collect()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Common training preconditions: non-empty, finite, at least two classes.
    pub fn check_trainable(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::invalid("training set is empty"));
        }
        if !self.all_finite() {
            return Err(Error::invalid("training set contains non-finite features"));
        }
        if self.present_classes().len() < 2 {
            return Err(Error::degenerate(
                "training set contains a single class; nothing to discriminate",
            ));
        }
        Ok(())
    }
}
