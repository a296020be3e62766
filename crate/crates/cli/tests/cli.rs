//! End-to-end checks of the compiled binary: files land where promised,
//! reruns are byte-identical, aggregates match the per-run reports, and
//! failures leave a structured record with a nonzero exit code.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::tempdir;

const TINY_SYNTH: &str = "2,40,0.15,0.03,0.3,5";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tifa-gcl"))
        .args(args)
        .output()
        .expect("binary should launch")
}

fn run_ok(args: &[&str]) {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_json(path: &Path) -> Value {
    let text = fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parsing {}: {e}", path.display()))
}

fn write_speed_config(dir: &Path) -> String {
    let path = dir.join("speed.json");
    fs::write(
        &path,
        r#"{"max_epochs": 30, "min_epochs": 10, "patience": 10, "hidden": 16}"#,
    )
    .unwrap();
    path.display().to_string()
}

#[test]
fn synth_writes_a_dataset_the_loader_accepts() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("data");
    let out_str = out.display().to_string();
    run_ok(&["synth", "--synth", TINY_SYNTH, "--seeds", "3", "--out", &out_str]);

    for name in ["meta.json", "edges.tsv", "features.tsv", "labels.tsv", "split.json", "config.json"] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let graph = tifa_gcl::graph::load_dir(&out).expect("generated dataset should load");
    assert_eq!(graph.n(), 80);
    assert_eq!(graph.num_classes(), 2);

    let config = read_json(&out.join("config.json"));
    assert_eq!(config["command"], "synth");
    assert_eq!(config["seeds"], serde_json::json!([3]));
    assert_eq!(config["synth"]["per_class"], 40);
    assert_eq!(config["sources"]["synth"], "flag");
}

#[test]
fn analyze_reruns_are_byte_identical_and_echo_precedence() {
    let dir = tempdir().unwrap();
    let knobs = dir.path().join("knobs.json");
    fs::write(
        &knobs,
        r#"{"max_epochs": 30, "min_epochs": 10, "patience": 10, "hidden": 16, "alpha": 0.9}"#,
    )
    .unwrap();
    let knobs_str = knobs.display().to_string();

    let out1 = dir.path().join("a1");
    let out2 = dir.path().join("a2");
    for out in [&out1, &out2] {
        let out_str = out.display().to_string();
        run_ok(&[
            "analyze", "--synth", TINY_SYNTH, "--seeds", "11", "--config", &knobs_str,
            "--alpha", "0.2", "--dump-lp", "--pairs", "--out", &out_str,
        ]);
    }

    for name in [
        "config.json", "tig.tsv", "grid.csv", "bins.csv", "intra_ratio.csv", "pairs.json",
        "z.tsv", "z_star.tsv",
    ] {
        let a = fs::read(out1.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"));
        let b = fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical reruns");
    }

    // The flag beats the config file, which beats the built-in default.
    let config = read_json(&out1.join("config.json"));
    assert_eq!(config["alpha"], 0.2);
    assert_eq!(config["sources"]["alpha"], "flag");
    assert_eq!(config["hidden"], 16);
    assert_eq!(config["sources"]["hidden"], "config-file");
    assert_eq!(config["sources"]["lr"], "method");
    assert_eq!(config["sources"]["n_roots"], "implementation");
    assert!(config["sigma"].is_f64(), "echo should resolve the derived sigma");

    // Grid cells cover exactly the labeled nodes outside the train split.
    let grid = fs::read_to_string(out1.join("grid.csv")).unwrap();
    let total: usize = grid
        .lines()
        .skip(1)
        .map(|line| line.split(',').nth(2).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 80 - 2 * 5);

    let tig = fs::read_to_string(out1.join("tig.tsv")).unwrap();
    assert_eq!(tig.lines().count(), 81, "header plus one row per node");

    let pairs = read_json(&out1.join("pairs.json"));
    assert_eq!(pairs["pairs"].as_array().unwrap().len(), 80);
}

#[test]
fn train_repeated_seed_has_zero_std_and_matching_report() {
    let dir = tempdir().unwrap();
    let speed = write_speed_config(dir.path());
    let out = dir.path().join("runs");
    let out_str = out.display().to_string();
    run_ok(&[
        "train", "--synth", TINY_SYNTH, "--mode", "baseline", "--seeds", "5,5",
        "--config", &speed, "--out", &out_str,
    ]);

    let summary = read_json(&out.join("summary.json"));
    let rows = summary.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["mode"], "baseline");
    assert_eq!(rows[0]["std_test_acc"], 0.0, "identical runs must agree exactly");

    let report = read_json(&out.join("baseline/seed-5/report.json"));
    assert_eq!(report["test_acc"], rows[0]["mean_test_acc"]);
    assert_eq!(report["config"]["max_epochs"], 30);
    assert_eq!(report["config"]["sources"]["max_epochs"], "config-file");

    let metrics = fs::read_to_string(out.join("baseline/seed-5/metrics.jsonl")).unwrap();
    let epochs: Vec<Value> =
        metrics.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!epochs.is_empty() && epochs.len() <= 30);
    for (i, epoch) in epochs.iter().enumerate() {
        assert_eq!(epoch["epoch"], i as u64 + 1);
        assert!(epoch["val_acc"].is_f64());
        assert!(epoch["loss_ce"].is_f64());
    }
    let best = report["best_epoch"].as_u64().unwrap() as usize;
    assert!(best >= 1 && best <= epochs.len());
}

#[test]
fn train_covers_all_three_modes_by_default() {
    let dir = tempdir().unwrap();
    let speed = write_speed_config(dir.path());
    let out = dir.path().join("runs");
    let out_str = out.display().to_string();
    run_ok(&[
        "train", "--synth", TINY_SYNTH, "--seeds", "1", "--config", &speed, "--out", &out_str,
    ]);

    let summary = read_json(&out.join("summary.json"));
    let modes: Vec<&str> = summary
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row["mode"].as_str().unwrap())
        .collect();
    assert_eq!(modes, vec!["baseline", "uniform-gcl", "tifa-gcl"]);
    for mode in modes {
        let report = out.join(mode).join("seed-1/report.json");
        assert!(report.is_file(), "missing report for {mode}");
        let report = read_json(&report);
        let bins = report["per_bin_acc"].as_array().unwrap();
        assert_eq!(bins.len(), 5);
        let covered: u64 = bins.iter().map(|b| b["count"].as_u64().unwrap()).sum();
        assert_eq!(covered, 10, "per-bin accuracy should cover the test split");
    }
}

#[test]
fn sample_saint_respects_the_walk_budget() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("dumps");
    let out_str = out.display().to_string();
    run_ok(&[
        "sample", "--synth", TINY_SYNTH, "--saint", "--n-roots", "1", "--walk-len", "4",
        "--seeds", "9", "--out", &out_str,
    ]);

    let text = fs::read_to_string(out.join("saint.jsonl")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "one record per seed");
    let record: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(record["seed"], 9);
    assert_eq!(record["roots"].as_array().unwrap().len(), 1);
    let nodes = record["nodes"].as_array().unwrap().len();
    assert!((1..=5).contains(&nodes), "one root walking 4 steps visits at most 5 nodes");
    assert_eq!(record["num_nodes"].as_u64().unwrap() as usize, nodes);
}

#[test]
fn sample_perturb_reruns_identically() {
    let dir = tempdir().unwrap();
    let out1 = dir.path().join("p1");
    let out2 = dir.path().join("p2");
    for out in [&out1, &out2] {
        let out_str = out.display().to_string();
        run_ok(&[
            "sample", "--synth", TINY_SYNTH, "--perturb", "--seeds", "4", "--out", &out_str,
        ]);
    }
    for name in ["added.tsv", "removed.tsv", "touched.tsv", "perturb.json"] {
        let a = fs::read(out1.join("seed-4").join(name)).unwrap();
        let b = fs::read(out2.join("seed-4").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical reruns");
    }
    let info = read_json(&out1.join("seed-4/perturb.json"));
    let gap = info["gap"].as_f64().unwrap();
    let sigma = info["sigma"].as_f64().unwrap();
    let exhausted = info["exhausted"].as_bool().unwrap();
    assert!(exhausted || gap >= sigma, "stop rule: gap {gap} should reach sigma {sigma}");
    assert!(info["touched"].as_u64().unwrap() >= 1);
}

#[test]
fn missing_input_leaves_an_error_record_and_nonzero_exit() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("broken");
    let out_str = out.display().to_string();
    let result = run(&["train", "--out", &out_str, "--seeds", "1"]);
    assert!(!result.status.success());
    let record = read_json(&out.join("error.json"));
    let message = record["error"].as_str().unwrap();
    assert!(message.contains("--dataset") || message.contains("--synth"), "got: {message}");
}

#[test]
fn unknown_mode_is_rejected_before_any_training() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("bad");
    let out_str = out.display().to_string();
    let result = run(&[
        "train", "--synth", TINY_SYNTH, "--mode", "turbo", "--seeds", "1", "--out", &out_str,
    ]);
    assert!(!result.status.success());
    assert!(out.join("error.json").is_file());
    assert!(!out.join("summary.json").exists());
}
