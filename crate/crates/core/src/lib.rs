//! Classification of olive-oil fluorescence spectra into EVOO, VOO and LOO.
//!
//! The crate covers the data model and preprocessing (`spectrum`), dataset and
//! report files (`ingest`), a seeded synthetic spectrum generator (`synth`),
//! seven classical classifiers (`classifiers`), a feed-forward network with
//! Adam (`ann`) and the repeated holdout protocol (`eval`).

pub mod ann;
pub mod classifiers;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod linalg;
pub mod matrix;
pub mod model;
pub mod rng;
pub mod spectrum;
pub mod synth;

pub use classifiers::{ClassifierSpec, Classify, TrainedModel};
pub use error::{Error, ErrorKind, Result};
pub use eval::{benchmark_all, repeated_eval, EvalReport, MlpSpec, ModelSpec, SplitPlan};
pub use matrix::FeatureMatrix;
pub use model::ModelDocument;
pub use spectrum::{
    build_feature_matrix, zscore_normalize, LabeledSpectrum, QualityClass, SpectraSet, Spectrum, WavelengthGrid,
};
pub use synth::{generate_dataset, SynthConfig};
