//! Property tests over preprocessing, I/O, splitting, statistics and classifiers.

mod common;

use std::collections::HashSet;
use std::sync::Arc;

use common::{blobs, random_vec};
use fluorospec::ann::train::initialize;
use fluorospec::ann::{softmax, train, MlpArchitecture, TrainConfig};
use fluorospec::classifiers::{fit, gini_impurity};
use fluorospec::eval::{mean_std, split_holdout};
use fluorospec::ingest::{load_dataset, save_dataset};
use fluorospec::spectrum::{mean_and_pop_std, subtract_background, CHANNELS};
use fluorospec::synth::add_baseline;
use fluorospec::{
    build_feature_matrix, zscore_normalize, ClassifierSpec, Classify, ErrorKind, FeatureMatrix, LabeledSpectrum, QualityClass,
    SpectraSet, SplitPlan, Spectrum, WavelengthGrid,
};
use proptest::prelude::*;

fn grid() -> Arc<WavelengthGrid> {
    Arc::new(WavelengthGrid::linear(350.0, 800.0).unwrap())
}

fn spectrum(seed: u64, scale: f64, offset: f64) -> Spectrum {
    let v = random_vec(seed, CHANNELS, scale).into_iter().map(|x| x + offset).collect();
    Spectrum::new(v, grid()).unwrap()
}

/// A small dataset: `per_class` samples per class, `reps` spectra each.
fn spectra_set(seed: u64, per_class: [usize; 3], reps: u32) -> SpectraSet {
    let g = grid();
    let mut records = Vec::new();
    let mut k = 0;
    for c in QualityClass::ALL {
        for s in 0..per_class[c.index()] {
            for r in 0..reps {
                k += 1;
                let v = random_vec(seed * 1000 + k, CHANNELS, 10.0);
                records.push(LabeledSpectrum {
                    spectrum: Spectrum::new(v, Arc::clone(&g)).unwrap(),
                    sample_id: format!("{c}-{s}"),
                    repetition: r,
                    label: c,
                });
            }
        }
    }
    SpectraSet::new(g, records).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn zscore_has_zero_mean_unit_std(seed in any::<u64>(), scale in 1e-3f64..1e4, offset in -1e4f64..1e4) {
        let z = zscore_normalize(&spectrum(seed, scale, offset)).unwrap();
        let (m, s) = mean_and_pop_std(z.intensities());
        prop_assert!(m.abs() < 1e-9);
        prop_assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zscore_is_idempotent_and_affine_invariant(
        seed in any::<u64>(),
        a in 1e-2f64..1e2,
        b in -1e2f64..1e2,
    ) {
        let s = spectrum(seed, 1.0, 0.0);
        let once = zscore_normalize(&s).unwrap();
        let twice = zscore_normalize(&once).unwrap();
        let moved = Spectrum::new(s.intensities().iter().map(|x| a * x + b).collect(), grid()).unwrap();
        let moved = zscore_normalize(&moved).unwrap();
        for ((p, q), r) in once.intensities().iter().zip(twice.intensities()).zip(moved.intensities()) {
            prop_assert!((p - q).abs() < 1e-9);
            prop_assert!((p - r).abs() < 1e-9);
        }
    }

    #[test]
    fn background_subtraction_undoes_addition(seed in any::<u64>()) {
        let s = spectrum(seed, 5.0, 1.0);
        let b = spectrum(seed ^ 0x55, 2.0, 3.0);
        let back = subtract_background(&add_baseline(&s, &b).unwrap(), &b).unwrap();
        for (x, y) in back.intensities().iter().zip(s.intensities()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_is_normalized_and_shift_invariant(
        z in prop::collection::vec(-30.0f64..30.0, 1..10),
        c in -100.0f64..100.0,
    ) {
        let p = softmax(&z);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|v| *v > 0.0 && *v <= 1.0));
        let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
        for (a, b) in p.iter().zip(softmax(&shifted)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_std_matches_welford(values in prop::collection::vec(-1e3f64..1e3, 1..200)) {
        let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
        for v in &values {
            n += 1.0;
            let delta = v - mean;
            mean += delta / n;
            m2 += delta * (v - mean);
        }
        let (m, s) = mean_std(&values);
        prop_assert!((m - mean).abs() < 1e-12 * mean.abs().max(1.0));
        prop_assert!((s - (m2 / n).sqrt()).abs() < 1e-12 * s.max(1.0));
    }

    #[test]
    fn gini_is_symmetric_and_bounded(a in 0usize..100, b in 0usize..100, c in 1usize..100) {
        let g = gini_impurity(&[a, b, c]).unwrap();
        for perm in [[a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            prop_assert!((gini_impurity(&perm).unwrap() - g).abs() < 1e-15);
        }
        prop_assert!((0.0..=2.0 / 3.0 + 1e-15).contains(&g));
        prop_assert!((gini_impurity(&[c, c, c]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stratified_split_is_a_proportional_partition(
        seed in any::<u64>(),
        per_class in prop::array::uniform3(2usize..30),
        frac in 0.3f64..0.95,
        rep in 0usize..50,
    ) {
        let x = blobs(seed, per_class, 2, 1.0);
        let plan = SplitPlan { train_fraction: frac, ..SplitPlan::with_seed(seed) };
        let s = split_holdout(&x, &plan, rep).unwrap();
        let train: HashSet<usize> = s.train.iter().copied().collect();
        prop_assert_eq!(train.len(), s.train.len());
        prop_assert!(s.validation.iter().all(|i| !train.contains(i)));
        prop_assert_eq!(s.train.len() + s.validation.len(), x.n_rows());
        for c in QualityClass::ALL {
            let n_c = per_class[c.index()] as f64;
            let got = s.train.iter().filter(|&&i| x.labels()[i] == c).count() as f64;
            prop_assert!((got - frac * n_c).abs() <= 1.0, "class {c}: {got} of {n_c}");
        }
        prop_assert_eq!(split_holdout(&x, &plan, rep).unwrap(), s);
    }

    #[test]
    fn unstratified_and_grouped_splits_partition(
        seed in any::<u64>(),
        per_class in prop::array::uniform3(2usize..6),
        reps in 1u32..5,
        rep in 0usize..20,
    ) {
        let data = spectra_set(seed % 1000, per_class, reps);
        let x = build_feature_matrix(&data, false).unwrap();
        for (stratified, group) in [(false, false), (true, true), (false, true)] {
            let plan = SplitPlan {
                stratified,
                group_by_sample: group,
                ..SplitPlan::with_seed(seed)
            };
            let s = match split_holdout(&x, &plan, rep) {
                Ok(s) => s,
                // Without stratification a class may land entirely in validation; that is refused.
                Err(e) if !stratified => {
                    prop_assert_eq!(e.kind(), ErrorKind::Input);
                    continue;
                }
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            let mut all: Vec<usize> = s.train.iter().chain(&s.validation).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..x.n_rows()).collect::<Vec<_>>());
            if group {
                let train_ids: HashSet<&str> = s.train.iter().map(|&i| x.sample_ids()[i].as_str()).collect();
                prop_assert!(s.validation.iter().all(|&i| !train_ids.contains(x.sample_ids()[i].as_str())));
            }
        }
    }

    #[test]
    fn dataset_save_load_round_trips(seed in 0u64..1000, per_class in prop::array::uniform3(1usize..3), reps in 1u32..3) {
        let data = spectra_set(seed, per_class, reps);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        save_dataset(&data, &path).unwrap();
        let back = load_dataset(&path).unwrap();
        prop_assert_eq!(&back, &data);
        save_dataset(&back, &dir.path().join("e.csv")).unwrap();
        prop_assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(dir.path().join("e.csv")).unwrap());
    }

    #[test]
    fn feature_matrix_round_trips_through_records(seed in 0u64..1000, per_class in prop::array::uniform3(1usize..3)) {
        let data = spectra_set(seed, per_class, 2);
        let x = build_feature_matrix(&data, false).unwrap();
        let back = SpectraSet::from_feature_matrix(Arc::clone(data.grid()), &x).unwrap();
        prop_assert_eq!(&back, &data);
        prop_assert_eq!(build_feature_matrix(&back, false).unwrap(), x);
    }

    #[test]
    fn predictions_ignore_training_row_order(seed in any::<u64>(), shift in 0usize..100) {
        let x = blobs(seed, [8, 7, 6], 3, 2.0);
        let n = x.n_rows();
        let perm: Vec<usize> = (0..n).map(|i| (i * 5 + shift) % n).collect();
        prop_assume!(perm.iter().collect::<HashSet<_>>().len() == n);
        let shuffled = x.select(&perm);
        let probes = blobs(seed ^ 1, [5, 5, 5], 3, 2.0);
        for spec in [ClassifierSpec::knn(), ClassifierSpec::Nb, ClassifierSpec::pca_lda(2)] {
            let a = fit(&spec, &x, 0).unwrap();
            let b = fit(&spec, &shuffled, 0).unwrap();
            for p in probes.rows() {
                prop_assert_eq!(a.decide(p), b.decide(p), "{}", spec.label());
            }
        }
    }

    #[test]
    fn knn_ignores_uniform_rescaling(seed in any::<u64>(), s in 1e-3f64..1e3) {
        let x = blobs(seed, [6, 6, 6], 3, 1.0);
        let scaled = FeatureMatrix::new(
            x.data().iter().map(|v| v * s).collect(),
            x.n_cols(),
            x.labels().to_vec(),
            x.sample_ids().to_vec(),
        ).unwrap();
        let a = fit(&ClassifierSpec::knn(), &x, 0).unwrap();
        let b = fit(&ClassifierSpec::knn(), &scaled, 0).unwrap();
        for p in blobs(seed ^ 2, [4, 4, 4], 3, 1.0).rows() {
            let q: Vec<f64> = p.iter().map(|v| v * s).collect();
            prop_assert_eq!(a.decide(p), b.decide(&q));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn training_is_deterministic(seed in any::<u64>(), epochs in 1usize..5) {
        let x = blobs(seed, [5, 5, 5], 4, 2.0);
        let arch = MlpArchitecture::new(4, vec![6, 3], 3).unwrap();
        let a = train(&arch, &TrainConfig::new(epochs, seed), &x).unwrap();
        let b = train(&arch, &TrainConfig::new(epochs, seed), &x).unwrap();
        prop_assert_eq!(a.model.params, b.model.params);
        prop_assert_eq!(initialize(&arch, seed), initialize(&arch, seed));
    }
}
