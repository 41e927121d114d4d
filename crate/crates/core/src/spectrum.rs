//! Spectra, quality labels and the two preprocessing steps applied before learning:
//! background subtraction and per-spectrum z-score normalization.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

pub const CHANNELS: usize = 1024;
pub const DEFAULT_GRID_START_NM: f64 = 350.0;
pub const DEFAULT_GRID_END_NM: f64 = 800.0;

/// Spread below which a spectrum is considered constant.
pub const ZSCORE_EPS: f64 = 1e-12;

/// Wavelength of each detector channel, in nm. Always `CHANNELS` long and strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavelengthGrid {
    values: Vec<f64>,
}

impl WavelengthGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != CHANNELS {
            return Err(Error::invalid(format!(
                "wavelength grid must have {CHANNELS} channels, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("wavelength grid contains non-finite values"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("wavelength grid must be strictly increasing"));
        }
        Ok(Self { values })
    }

    pub fn linear(start_nm: f64, end_nm: f64) -> Result<Self> {
        if !(start_nm.is_finite() && end_nm.is_finite() && end_nm > start_nm) {
            return Err(Error::invalid(format!(
                "grid range {start_nm}..{end_nm} is not increasing"
            )));
        }
        let step = (end_nm - start_nm) / (CHANNELS - 1) as f64;
        let mut values: Vec<f64> = (0..CHANNELS).map(|i| start_nm + step * i as f64).collect();
        values[CHANNELS - 1] = end_nm;
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.values[0]
    }

    pub fn end(&self) -> f64 {
        self.values[CHANNELS - 1]
    }

    /// Index of the channel closest to `nm`.
    pub fn nearest_channel(&self, nm: f64) -> usize {
        let idx = self.values.partition_point(|&v| v < nm);
        if idx == 0 {
            0
        } else if idx == self.values.len() {
            self.values.len() - 1
        } else if (self.values[idx] - nm).abs() < (nm - self.values[idx - 1]).abs() {
            idx
        } else {
            idx - 1
        }
    }
}

impl Default for WavelengthGrid {
    fn default() -> Self {
        Self::linear(DEFAULT_GRID_START_NM, DEFAULT_GRID_END_NM).expect("default grid is valid")
    }
}

/// Olive oil quality grade. The discriminant is the class index used for encoding and tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QualityClass {
    #[serde(rename = "EVOO")]
    Evoo = 0,
    #[serde(rename = "VOO")]
    Voo = 1,
    #[serde(rename = "LOO")]
    Loo = 2,
}

impl QualityClass {
    pub const COUNT: usize = 3;
    pub const ALL: [QualityClass; 3] = [QualityClass::Evoo, QualityClass::Voo, QualityClass::Loo];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QualityClass::Evoo => "EVOO",
            QualityClass::Voo => "VOO",
            QualityClass::Loo => "LOO",
        }
    }
}

impl fmt::Display for QualityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QualityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "EVOO" => Ok(QualityClass::Evoo),
            "VOO" => Ok(QualityClass::Voo),
            "LOO" => Ok(QualityClass::Loo),
            other => Err(Error::invalid(format!("unknown quality label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    intensities: Vec<f64>,
    grid: Arc<WavelengthGrid>,
}

impl Spectrum {
    pub fn new(intensities: Vec<f64>, grid: Arc<WavelengthGrid>) -> Result<Self> {
        if intensities.len() != grid.len() {
            return Err(Error::invalid(format!(
                "spectrum has {} channels, grid has {}",
                intensities.len(),
                grid.len()
            )));
        }
        if let Some(i) = intensities.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite intensity at channel {i}")));
        }
        Ok(Self { intensities, grid })
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn into_intensities(self) -> Vec<f64> {
        self.intensities
    }

    pub fn grid(&self) -> &Arc<WavelengthGrid> {
        &self.grid
    }

    pub fn same_grid(&self, other: &Spectrum) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    fn with_values(&self, intensities: Vec<f64>) -> Result<Self> {
        Spectrum::new(intensities, Arc::clone(&self.grid))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSpectrum {
    pub spectrum: Spectrum,
    pub sample_id: String,
    pub repetition: u32,
    pub label: QualityClass,
}

/// An ordered collection of labeled spectra acquired on one instrument grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectraSet {
    grid: Arc<WavelengthGrid>,
    records: Vec<LabeledSpectrum>,
}

impl SpectraSet {
    pub fn new(grid: Arc<WavelengthGrid>, records: Vec<LabeledSpectrum>) -> Result<Self> {
        let mut seen = std::collections::HashMap::<(&str, u32), usize>::new();
        let mut labels = std::collections::HashMap::<&str, QualityClass>::new();
        for (i, r) in records.iter().enumerate() {
            if !(Arc::ptr_eq(&grid, &r.spectrum.grid) || *grid == *r.spectrum.grid) {
                return Err(Error::GridMismatch);
            }
            if let Some(prev) = seen.insert((&r.sample_id, r.repetition), i) {
                return Err(Error::invalid(format!(
                    "records {prev} and {i} share sample {:?} repetition {}",
                    r.sample_id, r.repetition
                )));
            }
            if let Some(&l) = labels.get(r.sample_id.as_str()) {
                if l != r.label {
                    return Err(Error::invalid(format!(
                        "sample {:?} carries both {l} and {}",
                        r.sample_id, r.label
                    )));
                }
            } else {
                labels.insert(&r.sample_id, r.label);
            }
        }
        Ok(Self { grid, records })
    }

    pub fn grid(&self) -> &Arc<WavelengthGrid> {
        &self.grid
    }

    pub fn records(&self) -> &[LabeledSpectrum] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of spectra per class, in class order.
    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for r in &self.records {
            counts[r.label.index()] += 1;
        }
        counts
    }

    /// Number of distinct samples per class, in class order.
    pub fn sample_counts(&self) -> [usize; 3] {
        let mut seen = std::collections::HashSet::new();
        let mut counts = [0; 3];
        for r in &self.records {
            if seen.insert(r.sample_id.as_str()) {
                counts[r.label.index()] += 1;
            }
        }
        counts
    }

    /// Rebuild records from a feature matrix produced by [`build_feature_matrix`].
    /// Repetition indices are not carried by the matrix and are renumbered per sample.
    pub fn from_feature_matrix(grid: Arc<WavelengthGrid>, fm: &FeatureMatrix) -> Result<Self> {
        let mut reps = std::collections::HashMap::<&str, u32>::new();
        let mut records = Vec::with_capacity(fm.n_rows());
        for i in 0..fm.n_rows() {
            let id = fm.sample_ids()[i].as_str();
            let rep = reps.entry(id).or_insert(0);
            records.push(LabeledSpectrum {
                spectrum: Spectrum::new(fm.row(i).to_vec(), Arc::clone(&grid))?,
                sample_id: id.to_string(),
                repetition: *rep,
                label: fm.labels()[i],
            });
            *rep += 1;
        }
        Self::new(grid, records)
    }
}

pub fn subtract_background(s: &Spectrum, background: &Spectrum) -> Result<Spectrum> {
    if !s.same_grid(background) {
        return Err(Error::GridMismatch);
    }
    let out = s
        .intensities
        .iter()
        .zip(&background.intensities)
        .map(|(a, b)| a - b)
        .collect();
    s.with_values(out)
}

/// Mean and population standard deviation (divisor N), corrected two-pass.
/// The residual sum refines the mean, which matters when the offset dwarfs the spread.
pub fn mean_and_pop_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let rough = values.iter().sum::<f64>() / n;
    let resid = values.iter().map(|v| v - rough).sum::<f64>();
    let mean = rough + resid / n;
    let (mut sq, mut lin) = (0.0, 0.0);
    for v in values {
        let d = v - mean;
        sq += d * d;
        lin += d;
    }
    let var = ((sq - lin * lin / n) / n).max(0.0);
    (mean, var.sqrt())
}

pub(crate) fn zscore_values(values: &[f64]) -> Result<Vec<f64>> {
    let (mean, std) = mean_and_pop_std(values);
    if !(std > ZSCORE_EPS) {
        return Err(Error::degenerate(format!(
            "spectrum spread {std:e} is below {ZSCORE_EPS:e}; cannot normalize"
        )));
    }
    Ok(values.iter().map(|v| (v - mean) / std).collect())
}

/// Rescale a spectrum to zero mean and unit population standard deviation.
pub fn zscore_normalize(s: &Spectrum) -> Result<Spectrum> {
    s.with_values(zscore_values(&s.intensities)?)
}

pub fn build_feature_matrix(d: &SpectraSet, normalize: bool) -> Result<FeatureMatrix> {
    if d.is_empty() {
        return Err(Error::invalid("cannot build a feature matrix from an empty dataset"));
    }
    let n_cols = d.grid.len();
    let mut data = Vec::with_capacity(d.len() * n_cols);
    let mut labels = Vec::with_capacity(d.len());
    let mut ids = Vec::with_capacity(d.len());
    for r in &d.records {
        if normalize {
            let z = zscore_values(r.spectrum.intensities()).map_err(|e| {
                e.with_context(format!("sample {} repetition {}", r.sample_id, r.repetition))
            })?;
            data.extend_from_slice(&z);
        } else {
            data.extend_from_slice(r.spectrum.intensities());
        }
        labels.push(r.label);
        ids.push(r.sample_id.clone());
    }
    FeatureMatrix::new(data, n_cols, labels, ids)
}
