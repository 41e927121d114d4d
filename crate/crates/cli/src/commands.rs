use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fluorospec::ann::{grid_search, plot_data};
use fluorospec::classifiers::PCA_LDA_COMPONENTS;
use fluorospec::eval::{audit_document, score, split_holdout, BenchmarkConfig, Learner};
use fluorospec::ingest::{self, load_dataset, render_json, render_table, report_records, save_dataset};
use fluorospec::rng::named_seed;
use fluorospec::spectrum::{subtract_background, QualityClass};
use fluorospec::{
    benchmark_all, build_feature_matrix, generate_dataset, zscore_normalize, ClassifierSpec, Error, FeatureMatrix,
    LabeledSpectrum, MlpSpec, ModelDocument, ModelSpec, Result, SpectraSet, Spectrum, SplitPlan,
};

use crate::config::{distinct_paths, required, RunConfig};
use crate::{
    Algorithm, BenchmarkArgs, Cli, Command, Format, GridArgs, ModelArgs, PlanArgs, PredictArgs, PreprocessArgs,
    ReportArgs, SynthArgs, TrainArgs,
};

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::invalid("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::invalid(format!("cannot size the worker pool: {e}")))?;
    }
    let cfg = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Synth(a) => synth(&cfg, a),
        Command::Preprocess(a) => preprocess(&cfg, a),
        Command::Train(a) => train(&cfg, a),
        Command::Predict(a) => predict(&cfg, a),
        Command::Benchmark(a) => benchmark(&cfg, a),
        Command::Gridsearch(a) => gridsearch(&cfg, a),
        Command::Report(a) => report(a),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn synth(cfg: &RunConfig, a: SynthArgs) -> Result<()> {
    let seed = required(&a.seed, &cfg.seed, "--seed")?;
    let out = required(&a.out, &cfg.paths.dataset, "--out")?;
    let mut sc = cfg.synth.clone();
    if let Some(s) = &a.samples_per_class {
        sc.samples_per_class = <[usize; 3]>::try_from(s.as_slice())
            .map_err(|_| Error::invalid("--samples-per-class takes three counts: EVOO,VOO,LOO"))?;
    }
    if let Some(r) = a.repetitions {
        sc.repetitions_per_sample = r;
    }
    if let Some(v) = a.grid_start_nm {
        sc.grid_start_nm = v;
    }
    if let Some(v) = a.grid_end_nm {
        sc.grid_end_nm = v;
    }
    for p in &mut sc.profiles {
        if let Some(s) = a.noise_scale {
            p.noise_std *= s;
        }
        if let Some(v) = a.variability_scale {
            p.sample_variability *= v;
            for peak in &mut p.peaks {
                peak.amplitude_std *= v;
                peak.center_jitter_nm *= v;
            }
        }
    }
    sc.seed = named_seed(seed, "synth");
    let d = generate_dataset(&sc)?;
    save_dataset(&d, &out)?;
    let summary: Vec<String> = QualityClass::ALL
        .iter()
        .map(|c| format!("{c}:{}", d.sample_counts()[c.index()]))
        .collect();
    println!("{} ×{}", summary.join(" "), sc.repetitions_per_sample);
    println!("{} spectra written to {}", d.len(), out.display());
    Ok(())
}

fn preprocess(cfg: &RunConfig, a: PreprocessArgs) -> Result<()> {
    let data = required(&a.data, &cfg.paths.dataset, "--data")?;
    let out = required(&a.out, &cfg.paths.output, "--out")?;
    distinct_paths(&[("--data", Some(&data)), ("--out", Some(&out))])?;
    let d = load_dataset(&data)?;
    let background = match &a.background {
        Some(p) => Some(mean_spectrum(&load_dataset(p)?)?),
        None => None,
    };
    let records = d
        .records()
        .iter()
        .map(|r| {
            let mut s = r.spectrum.clone();
            if let Some(b) = &background {
                s = subtract_background(&s, b)?;
            }
            if !a.no_zscore {
                s = zscore_normalize(&s)
                    .map_err(|e| e.with_context(format!("sample {} repetition {}", r.sample_id, r.repetition)))?;
            }
            Ok(LabeledSpectrum { spectrum: s, ..r.clone() })
        })
        .collect::<Result<Vec<_>>>()?;
    let processed = SpectraSet::new(Arc::clone(d.grid()), records)?;
    save_dataset(&processed, &out)?;
    println!("{} spectra written to {}", processed.len(), out.display());
    Ok(())
}

fn mean_spectrum(d: &SpectraSet) -> Result<Spectrum> {
    if d.is_empty() {
        return Err(Error::invalid("background dataset is empty"));
    }
    let mut mean = vec![0.0; d.grid().len()];
    for r in d.records() {
        mean.iter_mut().zip(r.spectrum.intensities()).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= d.len() as f64);
    Spectrum::new(mean, Arc::clone(d.grid()))
}

fn plan_from(cfg: &RunConfig, a: &PlanArgs, seed: u64) -> Result<SplitPlan> {
    let mut p = cfg.plan.clone();
    if let Some(r) = a.repetitions {
        p.n_repetitions = r;
    }
    if let Some(f) = a.train_fraction {
        p.train_fraction = f;
    }
    p.stratified &= !a.unstratified;
    p.group_by_sample |= a.group_by_sample;
    p.per_sample_vote |= a.sample_vote;
    p.base_seed = named_seed(seed, "split");
    p.validate()?;
    Ok(p)
}

fn normalize(cfg: &RunConfig, a: &PlanArgs) -> bool {
    !a.raw && cfg.normalize.unwrap_or(true)
}

fn load_matrix(path: &Path, normalize: bool) -> Result<FeatureMatrix> {
    build_feature_matrix(&load_dataset(path)?, normalize)
}

fn mlp_spec(cfg: &RunConfig, m: &ModelArgs) -> MlpSpec {
    let mut s = cfg.mlp.clone().unwrap_or_else(MlpSpec::best);
    if let Some(h) = &m.hidden {
        s.hidden_layers = h.clone();
    }
    if let Some(e) = m.epochs {
        s.epochs = e;
    }
    if let Some(b) = m.batch_size {
        s.batch_size = b;
    }
    s
}

fn model_spec(cfg: &RunConfig, alg: Algorithm, m: &ModelArgs) -> ModelSpec {
    let spec = match alg {
        Algorithm::Ann => return mlp_spec(cfg, m).into(),
        Algorithm::Svm => ClassifierSpec::Svm {
            c: m.c.unwrap_or(1.0),
            gamma: m.gamma,
        },
        Algorithm::Nb => ClassifierSpec::Nb,
        Algorithm::Mlr => ClassifierSpec::Mlr { l2: m.l2.unwrap_or(1.0) },
        Algorithm::PcaLda => ClassifierSpec::pca_lda(m.n_components.unwrap_or(10)),
        Algorithm::Dt => ClassifierSpec::Dt,
        Algorithm::Rf => ClassifierSpec::Rf {
            n_trees: m.n_trees.unwrap_or(100),
            max_features: m.max_features,
        },
        Algorithm::Knn => ClassifierSpec::Knn { k: m.k.unwrap_or(3) },
    };
    spec.into()
}

fn train(cfg: &RunConfig, a: TrainArgs) -> Result<()> {
    let seed = required(&a.seed, &cfg.seed, "--seed")?;
    let data = required(&a.data, &cfg.paths.dataset, "--data")?;
    let out = required(&a.out, &cfg.paths.model, "--out")?;
    distinct_paths(&[("--data", Some(&data)), ("--out", Some(&out))])?;
    let normalize = normalize(cfg, &a.plan);
    let spec = model_spec(cfg, a.algorithm, &a.model);
    spec.validate()?;
    let fm = load_matrix(&data, normalize)?;
    let init = named_seed(seed, "init");
    let model = if a.holdout {
        let plan = plan_from(cfg, &a.plan, seed)?;
        let split = split_holdout(&fm, &plan, 0)?;
        let model = spec.fit(&fm.select(&split.train), init)?;
        let acc = score(&model, &fm, &split.validation, plan.per_sample_vote)?;
        println!(
            "validation accuracy {acc:.4} ({} train / {} validation rows)",
            split.train.len(),
            split.validation.len()
        );
        model
    } else {
        spec.fit(&fm, init)?
    };
    ModelDocument::new(spec.clone(), model, normalize, seed).save(&out)?;
    println!("{} model written to {}", spec.label(), out.display());
    Ok(())
}

fn predict(cfg: &RunConfig, a: PredictArgs) -> Result<()> {
    let model_path = required(&a.model, &cfg.paths.model, "--model")?;
    let data = required(&a.data, &cfg.paths.dataset, "--data")?;
    let out = a.out.clone().or_else(|| cfg.paths.output.clone());
    distinct_paths(&[
        ("--model", Some(&model_path)),
        ("--data", Some(&data)),
        ("--out", out.as_deref()),
    ])?;
    let doc = ModelDocument::load(&model_path)?;
    let d = load_dataset(&data)?;
    let fm = build_feature_matrix(&d, doc.normalize)?;
    let predictions = doc.predict_all(&fm)?;
    let mut csv = String::from("sample_id,repetition,label,predicted,correct\n");
    let mut hits = 0;
    for (r, p) in d.records().iter().zip(&predictions) {
        let ok = r.label == *p;
        hits += usize::from(ok);
        let _ = writeln!(csv, "{},{},{},{},{}", r.sample_id, r.repetition, r.label, p, ok);
    }
    if let Some(out) = &out {
        write(out, &csv)?;
    }
    println!(
        "accuracy {:.4} ({hits}/{})",
        hits as f64 / predictions.len() as f64,
        predictions.len()
    );
    Ok(())
}

const ALL_ALGORITHMS: [Algorithm; 8] = [
    Algorithm::Svm,
    Algorithm::Nb,
    Algorithm::Mlr,
    Algorithm::PcaLda,
    Algorithm::Dt,
    Algorithm::Ann,
    Algorithm::Rf,
    Algorithm::Knn,
];

fn benchmark_config(cfg: &RunConfig, a: &BenchmarkArgs) -> BenchmarkConfig {
    if a.algorithms.is_none() && a.pca_components.is_none() {
        if let Some(b) = &cfg.benchmark {
            return b.clone();
        }
    }
    let chosen = a.algorithms.clone().unwrap_or_else(|| ALL_ALGORITHMS.to_vec());
    let components = a.pca_components.clone().unwrap_or_else(|| PCA_LDA_COMPONENTS.to_vec());
    let mut models = Vec::new();
    for alg in ALL_ALGORITHMS.iter().filter(|alg| chosen.contains(alg)) {
        if *alg == Algorithm::PcaLda {
            models.extend(components.iter().map(|&k| ModelSpec::from(ClassifierSpec::pca_lda(k))));
        } else {
            models.push(model_spec(cfg, *alg, &a.model));
        }
    }
    BenchmarkConfig { models }
}

fn benchmark(cfg: &RunConfig, a: BenchmarkArgs) -> Result<()> {
    let seed = required(&a.seed, &cfg.seed, "--seed")?;
    let data = required(&a.data, &cfg.paths.dataset, "--data")?;
    let out = required(&a.out, &cfg.paths.output, "--out")?;
    let table = a.table.clone().or_else(|| cfg.paths.table.clone());
    let audit = a.audit.clone().or_else(|| cfg.paths.audit.clone());
    distinct_paths(&[
        ("--data", Some(&data)),
        ("--out", Some(&out)),
        ("--table", table.as_deref()),
        ("--audit", audit.as_deref()),
    ])?;
    let plan = plan_from(cfg, &a.plan, seed)?;
    let bench = benchmark_config(cfg, &a);
    if bench.models.is_empty() {
        return Err(Error::invalid("no algorithms selected"));
    }
    let fm = load_matrix(&data, normalize(cfg, &a.plan))?;
    let report = benchmark_all(&fm, &plan, &bench)?;
    let records = report_records(&report);
    let text = render_table(&records);
    write(&out, &render_json(&records))?;
    if let Some(t) = &table {
        write(t, &text)?;
    }
    if let Some(p) = &audit {
        let doc = audit_document(&fm, &plan, &report)?;
        write(p, &(serde_json::to_string(&doc).expect("audit serializes") + "\n"))?;
    }
    print!("{text}");
    Ok(())
}

fn gridsearch(cfg: &RunConfig, a: GridArgs) -> Result<()> {
    let seed = required(&a.seed, &cfg.seed, "--seed")?;
    let data = required(&a.data, &cfg.paths.dataset, "--data")?;
    let out = required(&a.out, &cfg.paths.output, "--out")?;
    let plot: Option<PathBuf> = a.plot.clone().or_else(|| cfg.paths.plot.clone());
    distinct_paths(&[
        ("--data", Some(&data)),
        ("--out", Some(&out)),
        ("--plot", plot.as_deref()),
    ])?;
    let plan = plan_from(cfg, &a.plan, seed)?;
    let mut grid = cfg.grid.clone();
    if let Some(v) = &a.layers {
        grid.layers = v.clone();
    }
    if let Some(v) = &a.widths {
        grid.widths = v.clone();
    }
    if let Some(v) = &a.epochs {
        grid.epochs = v.clone();
    }
    let mut template = cfg.mlp.clone().unwrap_or_else(MlpSpec::best);
    if let Some(b) = a.batch_size {
        template.batch_size = b;
    }
    let fm = load_matrix(&data, normalize(cfg, &a.plan))?;
    let cells = grid_search(&fm, &grid, &plan, &template)?;
    write(&out, &(serde_json::to_string_pretty(&cells).expect("cells serialize") + "\n"))?;
    let plot_text = plot_data(&cells);
    if let Some(p) = &plot {
        write(p, &plot_text)?;
    }
    print!("{plot_text}");
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let records = ingest::load_report(&a.input)?;
    let text = match a.format {
        Format::Table => render_table(&records),
        Format::Json => render_json(&records),
    };
    match &a.out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
