//! Repeated holdout validation and the multi-algorithm benchmark.

pub mod benchmark;
pub mod protocol;
pub mod split;
pub mod stats;

pub use benchmark::{
    audit_document, audit_splits, benchmark_all, pca_lda_sweep, BenchmarkConfig, EvalReport, ReportRow, SplitAudit,
};
pub use protocol::{
    repeated_eval, repeated_eval_multi, score, FittedModel, Learner, MlpSpec, ModelSpec, RepeatedResult,
};
pub use split::{split_holdout, Split, SplitPlan};
pub use stats::{accuracy, mean_std};
