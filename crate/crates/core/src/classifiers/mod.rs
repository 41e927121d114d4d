//! Classical classifiers behind one fit/predict contract.

pub mod knn;
pub mod lda;
pub mod mlr;
pub mod nb;
pub mod pca;
pub mod svm;
pub mod tree;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::spectrum::QualityClass;

pub use knn::KnnModel;
pub use lda::{LdaModel, PcaLdaModel};
pub use mlr::MlrModel;
pub use nb::NbModel;
pub use pca::PcaModel;
pub use svm::SvmModel;
pub use tree::{gini_impurity, DecisionTree, RandomForest};

pub const PCA_LDA_COMPONENTS: [usize; 9] = [2, 3, 4, 5, 10, 15, 20, 25, 30];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm")]
pub enum ClassifierSpec {
    #[serde(rename = "SVM")]
    Svm {
        c: f64,
        /// RBF width; `None` selects 1 / (d · mean feature variance).
        gamma: Option<f64>,
    },
    #[serde(rename = "NB")]
    Nb,
    #[serde(rename = "MLR")]
    Mlr { l2: f64 },
    #[serde(rename = "PCA_LDA")]
    PcaLda { n_components: usize },
    #[serde(rename = "DT")]
    Dt,
    #[serde(rename = "RF")]
    Rf {
        n_trees: usize,
        /// Features examined per split; `None` selects ⌊√d⌋.
        max_features: Option<usize>,
    },
    #[serde(rename = "KNN")]
    Knn { k: usize },
}

impl ClassifierSpec {
    pub fn svm() -> Self {
        ClassifierSpec::Svm { c: 1.0, gamma: None }
    }
    pub fn mlr() -> Self {
        ClassifierSpec::Mlr { l2: 1.0 }
    }
    pub fn pca_lda(n_components: usize) -> Self {
        ClassifierSpec::PcaLda { n_components }
    }
    pub fn rf() -> Self {
        ClassifierSpec::Rf {
            n_trees: 100,
            max_features: None,
        }
    }
    pub fn knn() -> Self {
        ClassifierSpec::Knn { k: 3 }
    }

    /// Parse an algorithm tag (`svm`, `nb`, `mlr`, `pca_lda`, `dt`, `rf`, `knn`) into its default spec.
    pub fn from_tag(tag: &str) -> Result<Self> {
        Ok(match tag.to_ascii_lowercase().replace(['-', '+'], "_").as_str() {
            "svm" => Self::svm(),
            "nb" => ClassifierSpec::Nb,
            "mlr" => Self::mlr(),
            "pca_lda" | "pcalda" => Self::pca_lda(10),
            "dt" => ClassifierSpec::Dt,
            "rf" => Self::rf(),
            "knn" | "k_nn" => Self::knn(),
            other => return Err(Error::invalid(format!("unknown algorithm {other:?}"))),
        })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ClassifierSpec::Svm { c, gamma } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::invalid("SVM C must be positive"));
                }
                if let Some(g) = gamma {
                    if !(g > 0.0 && g.is_finite()) {
                        return Err(Error::invalid("SVM gamma must be positive"));
                    }
                }
            }
            ClassifierSpec::Mlr { l2 } => {
                if !(l2 >= 0.0 && l2.is_finite()) {
                    return Err(Error::invalid("MLR L2 penalty must be nonnegative"));
                }
            }
            ClassifierSpec::PcaLda { n_components } if n_components == 0 => {
                return Err(Error::invalid("PCA component count must be at least 1"));
            }
            ClassifierSpec::Rf { n_trees, max_features } => {
                if n_trees == 0 {
                    return Err(Error::invalid("random forest needs at least one tree"));
                }
                if max_features == Some(0) {
                    return Err(Error::invalid("max_features must be at least 1"));
                }
            }
            ClassifierSpec::Knn { k } if k == 0 => {
                return Err(Error::invalid("k must be at least 1"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Short display label, e.g. `PCA+LDA (10)`.
    pub fn label(&self) -> String {
        match self {
            ClassifierSpec::Svm { .. } => "SVM".into(),
            ClassifierSpec::Nb => "NB".into(),
            ClassifierSpec::Mlr { .. } => "MLR".into(),
            ClassifierSpec::PcaLda { n_components } => format!("PCA+LDA ({n_components})"),
            ClassifierSpec::Dt => "DT".into(),
            ClassifierSpec::Rf { .. } => "RF".into(),
            ClassifierSpec::Knn { .. } => "k-NN".into(),
        }
    }

    pub fn params(&self) -> BTreeMap<String, serde_json::Value> {
        let mut p = BTreeMap::new();
        match *self {
            ClassifierSpec::Svm { c, gamma } => {
                p.insert("C".into(), json!(c));
                p.insert("kernel".into(), json!("rbf"));
                p.insert("gamma".into(), gamma.map_or(json!("1/(d*mean_var)"), |g| json!(g)));
                p.insert("multiclass".into(), json!("one-vs-one"));
            }
            ClassifierSpec::Nb => {
                p.insert("variant".into(), json!("gaussian"));
            }
            ClassifierSpec::Mlr { l2 } => {
                p.insert("penalty".into(), json!("l2"));
                p.insert("lambda".into(), json!(l2));
            }
            ClassifierSpec::PcaLda { n_components } => {
                p.insert("n_components".into(), json!(n_components));
            }
            ClassifierSpec::Dt => {
                p.insert("criterion".into(), json!("gini"));
            }
            ClassifierSpec::Rf { n_trees, max_features } => {
                p.insert("criterion".into(), json!("gini"));
                p.insert("n_trees".into(), json!(n_trees));
                p.insert("max_features".into(), max_features.map_or(json!("sqrt"), |m| json!(m)));
            }
            ClassifierSpec::Knn { k } => {
                p.insert("k".into(), json!(k));
                p.insert("metric".into(), json!("euclidean"));
            }
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm")]
pub enum TrainedModel {
    #[serde(rename = "SVM")]
    Svm(SvmModel),
    #[serde(rename = "NB")]
    Nb(NbModel),
    #[serde(rename = "MLR")]
    Mlr(MlrModel),
    #[serde(rename = "PCA_LDA")]
    PcaLda(PcaLdaModel),
    #[serde(rename = "DT")]
    Dt(DecisionTree),
    #[serde(rename = "RF")]
    Rf(RandomForest),
    #[serde(rename = "KNN")]
    Knn(KnnModel),
}

/// Shared prediction surface. `decide` assumes a validated input row.
pub trait Classify {
    fn n_features(&self) -> usize;
    fn decide(&self, x: &[f64]) -> QualityClass;

    fn predict(&self, x: &[f64]) -> Result<QualityClass> {
        check_input(x, self.n_features())?;
        Ok(self.decide(x))
    }
}

pub(crate) fn check_input(x: &[f64], n_features: usize) -> Result<()> {
    if x.len() != n_features {
        return Err(Error::invalid(format!(
            "input has {} features, model expects {n_features}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("input contains non-finite values"));
    }
    Ok(())
}

pub fn fit(spec: &ClassifierSpec, train: &FeatureMatrix, seed: u64) -> Result<TrainedModel> {
    spec.validate()?;
    train.check_trainable()?;
    Ok(match *spec {
        ClassifierSpec::Svm { c, gamma } => TrainedModel::Svm(svm::fit(train, c, gamma)?),
        ClassifierSpec::Nb => TrainedModel::Nb(nb::fit(train)?),
        ClassifierSpec::Mlr { l2 } => TrainedModel::Mlr(mlr::fit(train, l2)?),
        ClassifierSpec::PcaLda { n_components } => {
            TrainedModel::PcaLda(lda::fit_pca_lda(train, n_components)?)
        }
        ClassifierSpec::Dt => TrainedModel::Dt(DecisionTree::fit(train)?),
        ClassifierSpec::Rf { n_trees, max_features } => {
            TrainedModel::Rf(RandomForest::fit(train, n_trees, max_features, seed)?)
        }
        ClassifierSpec::Knn { k } => TrainedModel::Knn(KnnModel::fit(train, k)?),
    })
}

impl TrainedModel {
    fn inner(&self) -> &dyn Classify {
        match self {
            TrainedModel::Svm(m) => m,
            TrainedModel::Nb(m) => m,
            TrainedModel::Mlr(m) => m,
            TrainedModel::PcaLda(m) => m,
            TrainedModel::Dt(m) => m,
            TrainedModel::Rf(m) => m,
            TrainedModel::Knn(m) => m,
        }
    }

    pub fn algorithm(&self) -> &'static str {
        match self {
            TrainedModel::Svm(_) => "SVM",
            TrainedModel::Nb(_) => "NB",
            TrainedModel::Mlr(_) => "MLR",
            TrainedModel::PcaLda(_) => "PCA_LDA",
            TrainedModel::Dt(_) => "DT",
            TrainedModel::Rf(_) => "RF",
            TrainedModel::Knn(_) => "KNN",
        }
    }
}

impl Classify for TrainedModel {
    fn n_features(&self) -> usize {
        self.inner().n_features()
    }

    fn decide(&self, x: &[f64]) -> QualityClass {
        self.inner().decide(x)
    }
}

/// Class with most votes; ties go to the lowest class index.
pub(crate) fn majority(votes: &[usize; 3]) -> QualityClass {
    let mut best = 0;
    for c in 1..3 {
        if votes[c] > votes[best] {
            best = c;
        }
    }
    QualityClass::ALL[best]
}
