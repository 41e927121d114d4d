use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classifiers::Classify;
use crate::error::{Error, Result};
use crate::eval::{repeated_eval_multi, MlpSpec, SplitPlan};
use crate::matrix::FeatureMatrix;

use super::train::train_with_checkpoints;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub layers: Vec<usize>,
    pub widths: Vec<usize>,
    pub epochs: Vec<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            layers: vec![1, 2, 3],
            widths: vec![2, 4, 8, 16, 32],
            epochs: vec![350, 600, 1000],
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() || self.widths.is_empty() || self.epochs.is_empty() {
            return Err(Error::invalid("grid axes must be non-empty"));
        }
        if self.layers.contains(&0) || self.widths.contains(&0) || self.epochs.contains(&0) {
            return Err(Error::invalid("grid values must be at least 1"));
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.layers.len() * self.widths.len() * self.epochs.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub layers: usize,
    pub width: usize,
    pub epochs: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

/// Evaluate every (depth, width, epochs) cell with the repeated holdout protocol.
///
/// One network per architecture and split is trained to the largest epoch count,
/// with snapshots at the smaller ones. Since training is seeded identically, each
/// snapshot is the network a separate shorter run would produce, so every cell
/// equals `repeated_eval` of the corresponding [`MlpSpec`].
/// Cells come back ordered by layers, then width, then epochs as listed.
pub fn grid_search(d: &FeatureMatrix, grid: &GridSpec, plan: &SplitPlan, template: &MlpSpec) -> Result<Vec<GridCell>> {
    grid.validate()?;
    let max_epochs = *grid.epochs.iter().max().expect("non-empty");
    let mut cells = Vec::with_capacity(grid.n_cells());
    for &layers in &grid.layers {
        for &width in &grid.widths {
            let spec = MlpSpec {
                hidden_layers: vec![width; layers],
                epochs: max_epochs,
                ..template.clone()
            };
            spec.validate()?;
            let results = repeated_eval_multi(d, plan, grid.epochs.len(), |train, seed| {
                let arch = spec.architecture(train.n_cols())?;
                let out = train_with_checkpoints(&arch, &spec.train_config(seed), train, &grid.epochs)?;
                Ok(out
                    .snapshots
                    .into_iter()
                    .map(|(_, m)| Box::new(m) as Box<dyn Classify + Send>)
                    .collect())
            })?;
            for (&epochs, r) in grid.epochs.iter().zip(results) {
                cells.push(GridCell {
                    layers,
                    width,
                    epochs,
                    mean_accuracy: r.mean_accuracy,
                    std_accuracy: r.std_accuracy,
                });
            }
        }
    }
    Ok(cells)
}

/// Whitespace-separated plot data: one header line then one row per cell.
pub fn plot_data(cells: &[GridCell]) -> String {
    let mut s = String::from("# layers width epochs mean std\n");
    for c in cells {
        let _ = writeln!(
            s,
            "{} {} {} {:.6} {:.6}",
            c.layers, c.width, c.epochs, c.mean_accuracy, c.std_accuracy
        );
    }
    s
}
