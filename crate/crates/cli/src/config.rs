use std::path::{Path, PathBuf};

use fluorospec::ann::GridSpec;
use fluorospec::eval::BenchmarkConfig;
use fluorospec::{Error, MlpSpec, Result, SplitPlan, SynthConfig};
use serde::{Deserialize, Serialize};

/// Everything a run can be configured with, as one JSON document.
/// Command-line flags override values read from here.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub synth: SynthConfig,
    pub plan: SplitPlan,
    pub benchmark: Option<BenchmarkConfig>,
    pub grid: GridSpec,
    pub mlp: Option<MlpSpec>,
    pub normalize: Option<bool>,
    pub paths: Paths,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub dataset: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub audit: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// Flag value if given, else the config value, else an error naming the flag.
pub fn required<T: Clone>(flag: &Option<T>, config: &Option<T>, name: &str) -> Result<T> {
    flag.clone()
        .or_else(|| config.clone())
        .ok_or_else(|| Error::invalid(format!("{name} is required (flag or config)")))
}

/// Reject output paths that would overwrite each other or an input.
pub fn distinct_paths(paths: &[(&str, Option<&Path>)]) -> Result<()> {
    let given: Vec<(&str, &Path)> = paths.iter().filter_map(|(n, p)| p.map(|p| (*n, p))).collect();
    for (i, (a, pa)) in given.iter().enumerate() {
        for (b, pb) in &given[i + 1..] {
            if pa == pb {
                return Err(Error::invalid(format!(
                    "{a} and {b} both point to {}",
                    pa.display()
                )));
            }
        }
    }
    Ok(())
}
