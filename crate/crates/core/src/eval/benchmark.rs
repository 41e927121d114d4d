use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::protocol::{repeated_eval, repeated_eval_multi, MlpSpec, ModelSpec, RepeatedResult};
use super::split::{split_holdout, Split, SplitPlan};
use crate::classifiers::{lda, pca, ClassifierSpec, Classify, PCA_LDA_COMPONENTS};
use crate::error::Result;
use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algorithm: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub n_repetitions: usize,
    pub split_accuracies: Vec<f64>,
}

impl ReportRow {
    pub fn new(spec: &ModelSpec, plan: &SplitPlan, result: RepeatedResult) -> Self {
        let mut params = spec.params();
        params.insert("protocol".into(), plan.protocol());
        Self {
            algorithm: spec.label(),
            params,
            mean_accuracy: result.mean_accuracy,
            std_accuracy: result.std_accuracy,
            n_repetitions: result.split_accuracies.len(),
            split_accuracies: result.split_accuracies,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    /// Stable ascending sort by mean accuracy.
    pub fn sort_ascending(&mut self) {
        self.rows.sort_by(|a, b| a.mean_accuracy.total_cmp(&b.mean_accuracy));
    }

    pub fn row(&self, algorithm: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm)
    }
}

/// Models evaluated by [`benchmark_all`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub models: Vec<ModelSpec>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        let mut models: Vec<ModelSpec> = vec![
            ClassifierSpec::svm().into(),
            ClassifierSpec::Nb.into(),
            ClassifierSpec::mlr().into(),
        ];
        models.extend(PCA_LDA_COMPONENTS.iter().map(|&k| ModelSpec::from(ClassifierSpec::pca_lda(k))));
        models.extend([
            ClassifierSpec::Dt.into(),
            MlpSpec::best().into(),
            ClassifierSpec::rf().into(),
            ClassifierSpec::knn().into(),
        ]);
        Self { models }
    }
}

/// Evaluate every configured model under the same split plan and return the
/// rows sorted by ascending mean accuracy.
pub fn benchmark_all(d: &FeatureMatrix, plan: &SplitPlan, cfg: &BenchmarkConfig) -> Result<EvalReport> {
    plan.validate()?;
    for m in &cfg.models {
        m.validate()?;
    }
    let components: Vec<usize> = cfg
        .models
        .iter()
        .filter_map(|m| match m {
            ModelSpec::Classical(ClassifierSpec::PcaLda { n_components }) => Some(*n_components),
            _ => None,
        })
        .collect();
    let mut sweep = if components.is_empty() {
        Vec::new()
    } else {
        pca_lda_sweep(d, plan, &components)?
    }
    .into_iter();

    let mut report = EvalReport::default();
    for m in &cfg.models {
        let result = match m {
            ModelSpec::Classical(ClassifierSpec::PcaLda { .. }) => sweep.next().expect("one sweep result per PCA+LDA row"),
            _ => repeated_eval(m, d, plan)?,
        };
        report.rows.push(ReportRow::new(m, plan, result));
    }
    report.sort_ascending();
    Ok(report)
}

/// PCA+LDA for several component counts. Leading principal components do not
/// depend on how many are kept, so each repetition runs one PCA at the largest
/// count and truncates it. Results match separate runs per count.
pub fn pca_lda_sweep(d: &FeatureMatrix, plan: &SplitPlan, components: &[usize]) -> Result<Vec<RepeatedResult>> {
    for &k in components {
        ClassifierSpec::pca_lda(k).validate()?;
    }
    let k_max = components.iter().copied().max().unwrap_or(1);
    repeated_eval_multi(d, plan, components.len(), |train, _seed| {
        train.check_trainable()?;
        let full = pca::fit(train, k_max)?;
        components
            .iter()
            .map(|&k| {
                let model = lda::lda_on_pca(train, full.truncated(k)?)?;
                Ok(Box::new(model) as Box<dyn Classify + Send>)
            })
            .collect()
    })
}

/// Index lists of every split of a plan, for audit files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAudit {
    pub repetition: usize,
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

pub fn audit_splits(d: &FeatureMatrix, plan: &SplitPlan) -> Result<Vec<SplitAudit>> {
    (0..plan.n_repetitions)
        .map(|rep| {
            let Split { train, validation } = split_holdout(d, plan, rep)?;
            Ok(SplitAudit {
                repetition: rep,
                train,
                validation,
            })
        })
        .collect()
}

/// Audit document: the plan, every split and every per-split accuracy.
pub fn audit_document(d: &FeatureMatrix, plan: &SplitPlan, report: &EvalReport) -> Result<serde_json::Value> {
    Ok(json!({
        "plan": plan,
        "splits": audit_splits(d, plan)?,
        "rows": report.rows,
    }))
}
