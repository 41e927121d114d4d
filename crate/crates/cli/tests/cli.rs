//! End-to-end runs of the `fluorospec` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fluorospec"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Small dataset: 3 samples per class, 4 spectra each.
fn small(dir: &Path, name: &str, seed: &str) {
    ok(
        dir,
        &["synth", "--seed", seed, "--out", name, "--samples-per-class", "3,3,3", "--repetitions", "4"],
    );
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(String::from).collect()
}

#[test]
fn synth_defaults_write_540_records() {
    let t = tempfile::tempdir().unwrap();
    let stdout = ok(t.path(), &["synth", "--seed", "1", "--out", "d.csv"]);
    assert!(stdout.contains("EVOO:12 VOO:8 LOO:7 ×20"), "{stdout}");
    assert!(stdout.contains("540 spectra"));
    let lines = data_lines(&t.path().join("d.csv"));
    assert_eq!(lines.len(), 540);
    assert!(lines.iter().all(|l| l.split(',').count() == 3 + 1024));
    assert!(t.path().join("d.csv.meta.json").exists());
}

#[test]
fn synth_is_byte_identical_for_a_seed() {
    let t = tempfile::tempdir().unwrap();
    ok(t.path(), &["synth", "--seed", "4", "--out", "a.csv", "--samples-per-class", "1,1,1", "--repetitions", "1"]);
    ok(t.path(), &["synth", "--seed", "4", "--out", "b.csv", "--samples-per-class", "1,1,1", "--repetitions", "1"]);
    ok(t.path(), &["synth", "--seed", "5", "--out", "c.csv", "--samples-per-class", "1,1,1", "--repetitions", "1"]);
    let read = |n: &str| fs::read(t.path().join(n)).unwrap();
    assert_eq!(data_lines(&t.path().join("a.csv")).len(), 3);
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_ne!(read("a.csv"), read("c.csv"));
}

#[test]
fn config_file_supplies_missing_flags() {
    let t = tempfile::tempdir().unwrap();
    fs::write(
        t.path().join("run.json"),
        r#"{"seed": 3, "synth": {"samples_per_class": [2, 1, 1], "repetitions_per_sample": 2}, "paths": {"dataset": "cfg.csv"}}"#,
    )
    .unwrap();
    ok(t.path(), &["--config", "run.json", "synth"]);
    assert_eq!(data_lines(&t.path().join("cfg.csv")).len(), 8);
    fs::write(t.path().join("bad.json"), r#"{"sede": 3}"#).unwrap();
    assert_eq!(code(&run(t.path(), &["--config", "bad.json", "synth"])), 2);
}

#[test]
fn missing_inputs_are_reported_with_exit_codes() {
    let t = tempfile::tempdir().unwrap();
    let missing = run(t.path(), &["benchmark", "--seed", "1", "--data", "nope.csv", "--out", "r.json"]);
    assert_eq!(code(&missing), 3);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.csv"));
    let no_seed = run(t.path(), &["synth", "--out", "d.csv"]);
    assert_eq!(code(&no_seed), 2);
    assert!(String::from_utf8_lossy(&no_seed.stderr).contains("--seed"));
    assert_eq!(code(&run(t.path(), &["synth", "--seed", "x"])), 2);
    assert_eq!(code(&run(t.path(), &["--threads", "0", "synth", "--seed", "1", "--out", "d.csv"])), 2);
    // Sidecar gone: the grid cannot be recovered.
    small(t.path(), "s.csv", "1");
    fs::remove_file(t.path().join("s.csv.meta.json")).unwrap();
    assert_eq!(code(&run(t.path(), &["preprocess", "--data", "s.csv", "--out", "p.csv"])), 3);
}

#[test]
fn malformed_datasets_exit_2() {
    let t = tempfile::tempdir().unwrap();
    small(t.path(), "d.csv", "2");
    let path = t.path().join("d.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();

    // One row short by a channel.
    let mut short = lines.clone();
    let cut = short[2].rfind(',').unwrap();
    short[2].truncate(cut);
    fs::write(&path, short.join("\n") + "\n").unwrap();
    let out = run(t.path(), &["preprocess", "--data", "d.csv", "--out", "p.csv"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("d.csv:3:"));

    // A constant spectrum cannot be z-scored.
    let fields: Vec<&str> = lines[1].split(',').take(3).collect();
    lines[1] = format!("{},{}", fields.join(","), vec!["5"; 1024].join(","));
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let out = run(t.path(), &["preprocess", "--data", "d.csv", "--out", "p.csv"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("EVOO-01"), "{err}");
    assert!(!t.path().join("p.csv").exists());
    // Raw features are still accepted.
    ok(t.path(), &["preprocess", "--data", "d.csv", "--out", "p.csv", "--no-zscore"]);
}

#[test]
fn single_class_training_set_exits_2() {
    let t = tempfile::tempdir().unwrap();
    small(t.path(), "d.csv", "3");
    let path = t.path().join("d.csv");
    let text = fs::read_to_string(&path).unwrap();
    let kept: Vec<&str> = text.lines().filter(|l| !l.starts_with("VOO") && !l.starts_with("LOO")).collect();
    fs::write(&path, kept.join("\n") + "\n").unwrap();
    let out = run(t.path(), &["train", "--seed", "1", "--data", "d.csv", "--out", "m.json", "--algorithm", "knn"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("class"));
    assert!(!t.path().join("m.json").exists());
}

#[test]
fn train_then_predict_round_trip() {
    let t = tempfile::tempdir().unwrap();
    small(t.path(), "d.csv", "4");
    ok(t.path(), &["train", "--seed", "1", "--data", "d.csv", "--out", "m.json", "--algorithm", "knn", "--k", "1"]);
    let stdout = ok(t.path(), &["predict", "--model", "m.json", "--data", "d.csv", "--out", "p.csv"]);
    assert!(stdout.contains("accuracy 1.0000 (36/36)"), "{stdout}");
    let csv = fs::read_to_string(t.path().join("p.csv")).unwrap();
    assert!(csv.starts_with("sample_id,repetition,label,predicted,correct\n"));
    assert_eq!(csv.lines().count(), 37);

    let held = ok(
        t.path(),
        &["train", "--seed", "1", "--data", "d.csv", "--out", "h.json", "--algorithm", "nb", "--holdout"],
    );
    assert!(held.contains("validation accuracy"), "{held}");

    ok(
        t.path(),
        &[
            "train", "--seed", "2", "--data", "d.csv", "--out", "a.json", "--algorithm", "ann", "--hidden", "4",
            "--epochs", "3",
        ],
    );
    ok(t.path(), &["predict", "--model", "a.json", "--data", "d.csv"]);

    // A missing model file is an I/O failure.
    assert_eq!(code(&run(t.path(), &["predict", "--model", "missing.json", "--data", "d.csv"])), 3);
}

#[test]
fn benchmark_filters_algorithms_and_writes_outputs() {
    let t = tempfile::tempdir().unwrap();
    small(t.path(), "d.csv", "5");
    let stdout = ok(
        t.path(),
        &[
            "benchmark", "--seed", "1", "--data", "d.csv", "--out", "r.json", "--table", "r.txt", "--audit",
            "a.json", "--algorithms", "knn,rf", "--n-trees", "5", "--repetitions", "3",
        ],
    );
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(t.path().join("r.json")).unwrap()).unwrap();
    let rows = report.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let keys: Vec<&str> = row.as_object().unwrap().keys().map(String::as_str).collect();
        for k in ["algorithm", "params", "mean_accuracy", "std_accuracy", "n_splits"] {
            assert!(keys.contains(&k), "{keys:?}");
        }
        assert_eq!(row["n_splits"], 3);
    }
    assert_eq!(fs::read_to_string(t.path().join("r.txt")).unwrap(), stdout);
    let audit: serde_json::Value = serde_json::from_str(&fs::read_to_string(t.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(audit["splits"].as_array().unwrap().len(), 3);

    let table = ok(t.path(), &["report", "--input", "r.json"]);
    assert_eq!(table, stdout);
    let json = ok(t.path(), &["report", "--input", "r.json", "--format", "json"]);
    assert_eq!(json, fs::read_to_string(t.path().join("r.json")).unwrap());

    let clash = run(t.path(), &["benchmark", "--seed", "1", "--data", "d.csv", "--out", "d.csv"]);
    assert_eq!(code(&clash), 2);
}

#[test]
fn gridsearch_emits_one_record_per_cell() {
    let t = tempfile::tempdir().unwrap();
    small(t.path(), "d.csv", "6");
    let stdout = ok(
        t.path(),
        &[
            "gridsearch", "--seed", "1", "--data", "d.csv", "--out", "g.json", "--plot", "g.txt", "--epochs", "4",
            "--repetitions", "2",
        ],
    );
    let cells: serde_json::Value = serde_json::from_str(&fs::read_to_string(t.path().join("g.json")).unwrap()).unwrap();
    let cells = cells.as_array().unwrap();
    assert_eq!(cells.len(), 15);
    for c in cells {
        for k in ["layers", "width", "epochs", "mean_accuracy", "std_accuracy"] {
            assert!(c.get(k).is_some());
        }
    }
    let plot = fs::read_to_string(t.path().join("g.txt")).unwrap();
    assert_eq!(plot, stdout);
    assert_eq!(plot.lines().filter(|l| !l.starts_with('#')).count(), 15);
}

#[test]
fn thread_count_does_not_change_outputs() {
    let t = tempfile::tempdir().unwrap();
    ok(t.path(), &["--threads", "1", "synth", "--seed", "7", "--out", "a.csv", "--samples-per-class", "3,3,3", "--repetitions", "4"]);
    ok(t.path(), &["--threads", "4", "synth", "--seed", "7", "--out", "b.csv", "--samples-per-class", "3,3,3", "--repetitions", "4"]);
    assert_eq!(fs::read(t.path().join("a.csv")).unwrap(), fs::read(t.path().join("b.csv")).unwrap());
    for (threads, out) in [("1", "r1.json"), ("4", "r4.json")] {
        ok(
            t.path(),
            &[
                "--threads", threads, "benchmark", "--seed", "2", "--data", "a.csv", "--out", out, "--algorithms",
                "rf,ann,knn", "--n-trees", "7", "--hidden", "4", "--epochs", "5", "--repetitions", "4",
            ],
        );
    }
    assert_eq!(fs::read(t.path().join("r1.json")).unwrap(), fs::read(t.path().join("r4.json")).unwrap());
}

#[test]
fn help_lists_every_flag() {
    let t = tempfile::tempdir().unwrap();
    let expected: &[(&str, &[&str])] = &[
        ("synth", &["--seed", "--out", "--samples-per-class", "--repetitions", "--noise-scale", "--variability-scale"]),
        ("preprocess", &["--data", "--out", "--background", "--no-zscore"]),
        ("train", &["--seed", "--data", "--out", "--algorithm", "--holdout", "--hidden", "--k"]),
        ("predict", &["--model", "--data", "--out"]),
        ("benchmark", &["--seed", "--data", "--out", "--table", "--audit", "--algorithms", "--repetitions"]),
        ("gridsearch", &["--seed", "--layers", "--widths", "--epochs", "--plot"]),
        ("report", &["--input", "--format", "--out"]),
    ];
    for (cmd, flags) in expected {
        let help = ok(t.path(), &[cmd, "--help"]);
        for f in *flags {
            assert!(help.contains(f), "{cmd} --help lacks {f}");
        }
        assert!(help.contains("--threads") && help.contains("--config"));
    }
}
