//! `fluorospec` command-line driver.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fluorospec::{Error, ErrorKind};

#[derive(Debug, Parser)]
#[command(name = "fluorospec", version, about = "Olive-oil fluorescence spectrum classification")]
pub struct Cli {
    /// Worker threads for parallel work (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Subtract a background and z-score every spectrum of a dataset.
    Preprocess(PreprocessArgs),
    /// Fit one model and save it.
    Train(TrainArgs),
    /// Apply a saved model to a dataset.
    Predict(PredictArgs),
    /// Run the repeated holdout benchmark over all algorithms.
    Benchmark(BenchmarkArgs),
    /// Grid search over network depth, width and epochs.
    Gridsearch(GridArgs),
    /// Render a saved JSON report as a table or JSON.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Global seed; the generator uses its `synth` sub-seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output dataset path (a `.meta.json` sidecar is written next to it).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Samples of EVOO, VOO and LOO.
    #[arg(long, value_delimiter = ',')]
    pub samples_per_class: Option<Vec<usize>>,
    /// Acquisitions per sample.
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub grid_start_nm: Option<f64>,
    #[arg(long)]
    pub grid_end_nm: Option<f64>,
    /// Multiply every profile's detector noise.
    #[arg(long)]
    pub noise_scale: Option<f64>,
    /// Multiply every profile's between-sample variability and peak spreads.
    #[arg(long)]
    pub variability_scale: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dataset whose mean spectrum is subtracted from every record.
    #[arg(long)]
    pub background: Option<PathBuf>,
    /// Skip z-score normalization.
    #[arg(long)]
    pub no_zscore: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    /// Holdout repetitions.
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Draw splits without class stratification.
    #[arg(long)]
    pub unstratified: bool,
    /// Keep all acquisitions of a sample on one side of each split.
    #[arg(long)]
    pub group_by_sample: bool,
    /// Score each validation sample by a majority vote over its spectra.
    #[arg(long)]
    pub sample_vote: bool,
    /// Feed raw intensities instead of z-scored spectra.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Svm,
    Nb,
    Mlr,
    PcaLda,
    Dt,
    Ann,
    Rf,
    Knn,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// SVM penalty C.
    #[arg(long)]
    pub c: Option<f64>,
    /// SVM RBF gamma (default 1 / (features · mean feature variance)).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// MLR L2 strength.
    #[arg(long)]
    pub l2: Option<f64>,
    /// PCA components for PCA+LDA.
    #[arg(long)]
    pub n_components: Option<usize>,
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long)]
    pub max_features: Option<usize>,
    /// Neighbours for k-NN.
    #[arg(long)]
    pub k: Option<usize>,
    /// Hidden layer widths for the network, e.g. 32,32,32.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output model path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub algorithm: Algorithm,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Train on the first holdout split only and report validation accuracy.
    #[arg(long)]
    pub holdout: bool,
    #[command(flatten)]
    pub plan: PlanArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Predictions CSV (`sample_id,repetition,label,predicted,correct`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Text table path (the table is always printed).
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Audit file with every split's indices and accuracies.
    #[arg(long)]
    pub audit: Option<PathBuf>,
    /// Restrict to these algorithms.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub algorithms: Option<Vec<Algorithm>>,
    /// PCA component counts for the PCA+LDA rows.
    #[arg(long, value_delimiter = ',')]
    pub pca_components: Option<Vec<usize>>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// JSON grid results.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot-data text file (layers, width, epochs, mean, std).
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub layers: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub widths: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub epochs: Option<Vec<usize>>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[command(flatten)]
    pub plan: PlanArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// JSON report written by `benchmark`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Input => 2,
        ErrorKind::Io => 3,
        ErrorKind::Numerical => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
