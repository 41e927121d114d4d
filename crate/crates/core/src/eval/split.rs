use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;
use crate::rng::{derive_seed, derived_stream, name_hash};
use crate::spectrum::QualityClass;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitPlan {
    pub train_fraction: f64,
    pub n_repetitions: usize,
    pub stratified: bool,
    /// Keep every repetition of a sample on the same side of the split.
    pub group_by_sample: bool,
    /// Score validation samples by a majority vote over their spectra.
    pub per_sample_vote: bool,
    pub base_seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            n_repetitions: 100,
            stratified: true,
            group_by_sample: false,
            per_sample_vote: false,
            base_seed: 0,
        }
    }
}

impl SplitPlan {
    pub fn with_seed(base_seed: u64) -> Self {
        Self {
            base_seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "train fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        if self.n_repetitions == 0 {
            return Err(Error::invalid("at least one repetition is required"));
        }
        Ok(())
    }

    /// Seed handed to the learner in repetition `rep`.
    pub fn fit_seed(&self, rep: usize) -> u64 {
        derive_seed(self.base_seed, &[name_hash("fit"), rep as u64])
    }

    /// Human-readable description of the protocol, recorded in reports.
    pub fn protocol(&self) -> serde_json::Value {
        serde_json::json!({
            "train_fraction": self.train_fraction,
            "stratified": self.stratified,
            "split_unit": if self.group_by_sample { "sample" } else { "spectrum" },
            "scoring": if self.per_sample_vote { "sample_vote" } else { "spectrum" },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Partition row indices for repetition `rep`. Both index lists come back sorted.
///
/// Stratified mode holds out `round((1 − f)·n_c)` units of every class `c`, where a
/// unit is a row or, in group mode, a sample.
pub fn split_holdout(d: &FeatureMatrix, plan: &SplitPlan, rep: usize) -> Result<Split> {
    plan.validate()?;
    if d.is_empty() {
        return Err(Error::invalid("cannot split an empty feature matrix"));
    }
    let units = units(d, plan.group_by_sample)?;
    let mut rng = derived_stream(plan.base_seed, &[name_hash("split"), rep as u64]);
    let hold = 1.0 - plan.train_fraction;
    let mut val_units: Vec<usize> = Vec::new();
    if plan.stratified {
        for c in QualityClass::ALL {
            let mut of_class: Vec<usize> = (0..units.len()).filter(|&u| units[u].0 == c).collect();
            if of_class.is_empty() {
                continue;
            }
            of_class.shuffle(&mut rng);
            let n_val = (hold * of_class.len() as f64).round() as usize;
            val_units.extend_from_slice(&of_class[..n_val]);
        }
    } else {
        let mut all: Vec<usize> = (0..units.len()).collect();
        all.shuffle(&mut rng);
        let n_val = (hold * units.len() as f64).round() as usize;
        val_units.extend_from_slice(&all[..n_val]);
    }

    let mut in_val = vec![false; d.n_rows()];
    for &u in &val_units {
        for &r in &units[u].1 {
            in_val[r] = true;
        }
    }
    let (validation, train): (Vec<usize>, Vec<usize>) = (0..d.n_rows()).partition(|&r| in_val[r]);
    let mut train_counts = [0usize; 3];
    for &r in &train {
        train_counts[d.labels()[r].index()] += 1;
    }
    let all_counts = d.class_counts();
    for c in QualityClass::ALL {
        if all_counts[c.index()] > 0 && train_counts[c.index()] == 0 {
            return Err(Error::invalid(format!(
                "class {c} has no training rows in repetition {rep} (train fraction {}, {} {c} rows)",
                plan.train_fraction,
                all_counts[c.index()]
            )));
        }
    }
    Ok(Split { train, validation })
}

/// Split units with their label and member rows, in first-appearance order.
fn units(d: &FeatureMatrix, group: bool) -> Result<Vec<(QualityClass, Vec<usize>)>> {
    if !group {
        return Ok(d.labels().iter().enumerate().map(|(i, &l)| (l, vec![i])).collect());
    }
    let mut slot: BTreeMap<&str, usize> = BTreeMap::new();
    let mut out: Vec<(QualityClass, Vec<usize>)> = Vec::new();
    for (i, (id, &l)) in d.sample_ids().iter().zip(d.labels()).enumerate() {
        match slot.get(id.as_str()) {
            Some(&u) => {
                if out[u].0 != l {
                    return Err(Error::invalid(format!("sample {id} carries more than one label")));
                }
                out[u].1.push(i);
            }
            None => {
                slot.insert(id, out.len());
                out.push((l, vec![i]));
            }
        }
    }
    Ok(out)
}
