//! Serialized trained models.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifiers::Classify;
use crate::error::{Error, Result};
use crate::eval::{FittedModel, ModelSpec};
use crate::matrix::FeatureMatrix;
use crate::spectrum::QualityClass;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A fitted model together with what is needed to apply it to raw spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    /// Whether spectra are z-scored before entering the model.
    pub normalize: bool,
    pub spec: ModelSpec,
    pub seed: u64,
    pub model: FittedModel,
}

impl ModelDocument {
    pub fn new(spec: ModelSpec, model: FittedModel, normalize: bool, seed: u64) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            normalize,
            spec,
            seed,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: Self = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {}",
                doc.format_version
            )));
        }
        Ok(doc)
    }

    /// Predict every row, validating the feature count first.
    pub fn predict_all(&self, x: &FeatureMatrix) -> Result<Vec<QualityClass>> {
        if x.n_cols() != self.model.n_features() {
            return Err(Error::invalid(format!(
                "data has {} channels, model expects {}",
                x.n_cols(),
                self.model.n_features()
            )));
        }
        x.rows().map(|r| self.model.predict(r)).collect()
    }
}
