//! Synthetic fluorescence spectra for the three quality classes.
//!
//! Each physical sample draws one set of latent parameters (peak positions,
//! amplitudes), then every repetition adds independent detector noise to the
//! same clean signal. Intensities are in arbitrary units.
//!
//! The default profiles are tuned by hand to give a strong narrow band near
//! 678 nm, a weak broad band near 720 nm, and no signal below 650 nm other than
//! a flat baseline. LOO is dimmer and more variable than VOO, which is more
//! variable than EVOO. None of the numeric defaults are measured values.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::spectrum::{
    LabeledSpectrum, QualityClass, SpectraSet, Spectrum, WavelengthGrid, DEFAULT_GRID_END_NM,
    DEFAULT_GRID_START_NM,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSpec {
    pub center_nm: f64,
    /// Standard deviation of the per-sample shift of the center.
    pub center_jitter_nm: f64,
    /// Gaussian sigma of the band.
    pub width_nm: f64,
    pub amplitude_mean: f64,
    /// Per-sample spread of the amplitude; the draw is lognormal with relative
    /// spread `amplitude_std / amplitude_mean`.
    pub amplitude_std: f64,
}

impl PeakSpec {
    fn validate(&self) -> Result<()> {
        let finite = [
            self.center_nm,
            self.center_jitter_nm,
            self.width_nm,
            self.amplitude_mean,
            self.amplitude_std,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("peak parameters must be finite"));
        }
        if self.width_nm <= 0.0 {
            return Err(Error::invalid("peak width must be positive"));
        }
        if self.amplitude_mean <= 0.0 {
            return Err(Error::invalid("peak amplitude mean must be positive"));
        }
        if self.center_jitter_nm < 0.0 || self.amplitude_std < 0.0 {
            return Err(Error::invalid("peak jitter and amplitude spread must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProfile {
    pub label: QualityClass,
    pub peaks: Vec<PeakSpec>,
    pub overall_scale: f64,
    /// Extra between-sample log-amplitude spread applied independently to each peak.
    pub sample_variability: f64,
    /// Per-channel detector noise added to every repetition.
    pub noise_std: f64,
    pub baseline_level: f64,
}

impl ClassProfile {
    pub fn default_for(label: QualityClass) -> Self {
        let peak = |center_nm, center_jitter_nm, width_nm, amplitude_mean, amplitude_std| PeakSpec {
            center_nm,
            center_jitter_nm,
            width_nm,
            amplitude_mean,
            amplitude_std,
        };
        match label {
            QualityClass::Evoo => ClassProfile {
                label,
                peaks: vec![peak(678.0, 1.0, 7.0, 1.0, 0.05), peak(720.0, 2.0, 16.0, 0.30, 0.02)],
                overall_scale: 1000.0,
                sample_variability: 0.04,
                noise_std: 4.0,
                baseline_level: 5.0,
            },
            QualityClass::Voo => ClassProfile {
                label,
                peaks: vec![peak(679.0, 1.5, 7.5, 1.0, 0.08), peak(721.0, 3.0, 17.0, 0.42, 0.05)],
                overall_scale: 900.0,
                sample_variability: 0.08,
                noise_std: 4.0,
                baseline_level: 5.0,
            },
            QualityClass::Loo => ClassProfile {
                label,
                peaks: vec![peak(676.0, 2.5, 8.5, 1.0, 0.12), peak(718.0, 4.0, 18.0, 0.55, 0.10)],
                overall_scale: 450.0,
                sample_variability: 0.15,
                noise_std: 4.0,
                baseline_level: 5.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        for p in &self.peaks {
            p.validate()?;
        }
        let ok = [self.overall_scale, self.sample_variability, self.noise_std, self.baseline_level]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0);
        if !ok {
            return Err(Error::invalid(format!(
                "{} profile: scale, variability, noise and baseline must be finite and nonnegative",
                self.label
            )));
        }
        Ok(())
    }
}

/// Per-sample latent parameters: one (center, width, amplitude) triple per peak.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleLatent {
    pub peaks: Vec<(f64, f64, f64)>,
    pub baseline: f64,
}

impl SampleLatent {
    pub fn draw(profile: &ClassProfile, rng: &mut Stream) -> Self {
        let peaks = profile
            .peaks
            .iter()
            .map(|p| {
                let z_center: f64 = rng.sample(StandardNormal);
                let z_amp: f64 = rng.sample(StandardNormal);
                let rel = p.amplitude_std / p.amplitude_mean;
                let spread = (rel * rel + profile.sample_variability * profile.sample_variability).sqrt();
                let center = p.center_nm + p.center_jitter_nm * z_center;
                let amp = profile.overall_scale * p.amplitude_mean * (spread * z_amp).exp();
                (center, p.width_nm, amp)
            })
            .collect();
        Self {
            peaks,
            baseline: profile.baseline_level,
        }
    }

    /// Noise-free signal: baseline plus Gaussian bands, clamped at zero.
    pub fn clean_signal(&self, grid: &WavelengthGrid) -> Vec<f64> {
        grid.values()
            .iter()
            .map(|&nm| {
                let bands: f64 = self
                    .peaks
                    .iter()
                    .map(|&(c, w, a)| {
                        let u = (nm - c) / w;
                        a * (-0.5 * u * u).exp()
                    })
                    .sum();
                (self.baseline + bands).max(0.0)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    /// One profile per class, in class order.
    pub profiles: Vec<ClassProfile>,
    pub samples_per_class: [usize; 3],
    pub repetitions_per_sample: usize,
    pub seed: u64,
    pub grid_start_nm: f64,
    pub grid_end_nm: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            profiles: QualityClass::ALL.iter().map(|&c| ClassProfile::default_for(c)).collect(),
            samples_per_class: [12, 8, 7],
            repetitions_per_sample: 20,
            seed: 0,
            grid_start_nm: DEFAULT_GRID_START_NM,
            grid_end_nm: DEFAULT_GRID_END_NM,
        }
    }
}

impl SynthConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.profiles.len() != 3 {
            return Err(Error::invalid(format!(
                "expected 3 class profiles, got {}",
                self.profiles.len()
            )));
        }
        for (p, c) in self.profiles.iter().zip(QualityClass::ALL) {
            if p.label != c {
                return Err(Error::invalid(format!(
                    "profile for {c} is labelled {}; profiles must follow EVOO, VOO, LOO order",
                    p.label
                )));
            }
            p.validate()?;
        }
        if self.samples_per_class.contains(&0) {
            return Err(Error::invalid("every class needs at least one sample"));
        }
        if self.repetitions_per_sample == 0 {
            return Err(Error::invalid("repetitions per sample must be at least 1"));
        }
        WavelengthGrid::linear(self.grid_start_nm, self.grid_end_nm)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<WavelengthGrid> {
        WavelengthGrid::linear(self.grid_start_nm, self.grid_end_nm)
    }
}

/// Spectra of one physical sample: one latent draw, then `repetitions` noisy acquisitions.
pub fn generate_sample_spectra(
    profile: &ClassProfile,
    grid: &Arc<WavelengthGrid>,
    repetitions: usize,
    rng: &mut Stream,
) -> Result<Vec<Spectrum>> {
    profile.validate()?;
    let latent = SampleLatent::draw(profile, rng);
    let clean = latent.clean_signal(grid);
    (0..repetitions)
        .map(|_| {
            let values = if profile.noise_std > 0.0 {
                clean
                    .iter()
                    .map(|&v| v + profile.noise_std * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            } else {
                clean.clone()
            };
            Spectrum::new(values, Arc::clone(grid))
        })
        .collect()
}

pub fn sample_id(label: QualityClass, index: usize) -> String {
    format!("{}-{:02}", label, index + 1)
}

pub fn generate_dataset(cfg: &SynthConfig) -> Result<SpectraSet> {
    cfg.validate()?;
    let grid = Arc::new(cfg.grid()?);
    let jobs: Vec<(QualityClass, usize)> = QualityClass::ALL
        .iter()
        .flat_map(|&c| (0..cfg.samples_per_class[c.index()]).map(move |s| (c, s)))
        .collect();
    let per_sample: Vec<Vec<LabeledSpectrum>> = jobs
        .par_iter()
        .map(|&(class, s)| {
            let mut stream = rng::derived_stream(cfg.seed, &[class.index() as u64, s as u64]);
            let spectra = generate_sample_spectra(
                &cfg.profiles[class.index()],
                &grid,
                cfg.repetitions_per_sample,
                &mut stream,
            )?;
            let id = sample_id(class, s);
            Ok(spectra
                .into_iter()
                .enumerate()
                .map(|(r, spectrum)| LabeledSpectrum {
                    spectrum,
                    sample_id: id.clone(),
                    repetition: r as u32,
                    label: class,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    SpectraSet::new(grid, per_sample.into_iter().flatten().collect())
}

/// Add a baseline curve to a spectrum (the inverse of background subtraction).
pub fn add_baseline(s: &Spectrum, baseline: &Spectrum) -> Result<Spectrum> {
    if !s.same_grid(baseline) {
        return Err(Error::GridMismatch);
    }
    let values = s
        .intensities()
        .iter()
        .zip(baseline.intensities())
        .map(|(a, b)| a + b)
        .collect();
    Spectrum::new(values, Arc::clone(s.grid()))
}
