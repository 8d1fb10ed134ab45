//! End-to-end command tests on a small mesh, including determinism of the
//! emitted bytes and cleanup on failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use elastiloc::cli::{commands, RunConfig};
use elastiloc::error::Error;
use elastiloc::eval::read_report_csv;

fn fast_config(extra: &[(&str, &str)]) -> RunConfig {
    let mut sets: Vec<(String, String)> = vec![
        ("mesh".into(), "5x3x2".into()),
        ("n_samples".into(), "30".into()),
        ("seed".into(), "7".into()),
        ("forest_n_estimators".into(), "5".into()),
        ("gbt_n_estimators".into(), "5".into()),
        ("knn_n_neighbors".into(), "3".into()),
    ];
    for (k, v) in extra {
        sets.push(((*k).to_string(), (*v).to_string()));
    }
    RunConfig::load(None, false, &sets).unwrap()
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_file() {
            out.insert(
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            );
        }
    }
    out
}

#[test]
fn generate_train_rerun_is_byte_identical() {
    let cfg = fast_config(&[]);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");

    let ds = commands::cmd_generate(&cfg, &out).unwrap();
    commands::cmd_train(&cfg, &ds, &out).unwrap();
    let first = read_dir_bytes(&out);
    assert!(first.contains_key("dataset_single_microphone.csv"));
    assert!(first.contains_key("manifest_generate.txt"));
    assert!(first.contains_key("manifest_train.txt"));
    assert!(first.contains_key("train_report.csv"));
    assert!(first.contains_key("train_mad.svg"));
    for fam in ["linear", "tree", "forest", "gbt", "knn", "ensemble"] {
        assert!(first.contains_key(&format!("model_{fam}.mdl")), "{fam}");
    }

    // Same config, same directory: every artifact byte-identical.
    let ds = commands::cmd_generate(&cfg, &out).unwrap();
    commands::cmd_train(&cfg, &ds, &out).unwrap();
    let second = read_dir_bytes(&out);
    assert_eq!(first.len(), second.len());
    for (name, bytes) in &first {
        assert_eq!(bytes, &second[name], "{name} changed between reruns");
    }

    // Fresh directory: dataset and report bytes still identical.
    let out2 = dir.path().join("run2");
    let ds2 = commands::cmd_generate(&cfg, &out2).unwrap();
    commands::cmd_train(&cfg, &ds2, &out2).unwrap();
    let third = read_dir_bytes(&out2);
    assert_eq!(
        first["dataset_single_microphone.csv"],
        third["dataset_single_microphone.csv"]
    );
    assert_eq!(first["train_report.csv"], third["train_report.csv"]);
    assert_eq!(first["model_ensemble.mdl"], third["model_ensemble.mdl"]);
}

#[test]
fn train_report_has_one_row_per_family() {
    let cfg = fast_config(&[("models", "linear,knn,ensemble")]);
    let dir = tempfile::tempdir().unwrap();
    let ds = commands::cmd_generate(&cfg, dir.path()).unwrap();
    commands::cmd_train(&cfg, &ds, dir.path()).unwrap();
    let rows = read_report_csv(&dir.path().join("train_report.csv")).unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r.model.as_str()).collect();
    assert_eq!(names, vec!["linear", "knn", "ensemble"]);
}

#[test]
fn universal_recipe_concatenates_with_provenance() {
    let cfg = fast_config(&[("recipe", "universal"), ("n_samples", "4")]);
    let dir = tempfile::tempdir().unwrap();
    let ds_path = commands::cmd_generate(&cfg, dir.path()).unwrap();
    let ds = elastiloc::datagen::read_dataset(&ds_path).unwrap();
    assert_eq!(ds.len(), 16, "4 parts x 4 samples");
    let tags: Vec<&str> = ds
        .samples()
        .iter()
        .map(|s| s.provenance.as_deref().unwrap())
        .collect();
    assert!(tags[0].contains("eps=0.01") && tags[0].contains("mesh=10x5x4"));
    assert!(tags[15].contains("eps=0.001") && tags[15].contains("mesh=20x10x8"));
    let meta = ds.meta();
    assert_eq!(meta.get("kind").map(String::as_str), Some("combined"));
}

#[test]
fn tune_grid_writes_one_row_per_combination() {
    let cfg = fast_config(&[
        ("tune_family", "forest"),
        ("grid_n_estimators", "2,4"),
        ("grid_max_depth", "3,6"),
        ("k_folds", "3"),
    ]);
    let dir = tempfile::tempdir().unwrap();
    let ds = commands::cmd_generate(&cfg, dir.path()).unwrap();
    commands::cmd_tune(&cfg, &ds, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("tune_forest.csv")).unwrap();
    assert_eq!(text.lines().count(), 5, "header + 2x2 combinations");
}

#[test]
fn tune_without_grid_is_a_config_error() {
    let cfg = fast_config(&[]);
    let dir = tempfile::tempdir().unwrap();
    let ds = commands::cmd_generate(&cfg, dir.path()).unwrap();
    match commands::cmd_tune(&cfg, &ds, dir.path()) {
        Err(e @ Error::Config(_)) => assert_eq!(e.exit_code(), 2),
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn evaluate_two_sensor_types_adds_averaged_row() {
    let mic_cfg = fast_config(&[("models", "knn")]);
    let acc_cfg = fast_config(&[("models", "knn"), ("sensors", "accelerometer")]);
    let dir = tempfile::tempdir().unwrap();

    let mic_ds = commands::cmd_generate(&mic_cfg, &dir.path().join("mic")).unwrap();
    commands::cmd_train(&mic_cfg, &mic_ds, &dir.path().join("mic")).unwrap();
    let acc_ds = commands::cmd_generate(&acc_cfg, &dir.path().join("acc")).unwrap();
    commands::cmd_train(&acc_cfg, &acc_ds, &dir.path().join("acc")).unwrap();

    let out = dir.path().join("eval");
    commands::cmd_evaluate(
        &mic_cfg,
        &[
            (dir.path().join("mic/model_knn.mdl"), mic_ds.clone()),
            (dir.path().join("acc/model_knn.mdl"), acc_ds.clone()),
        ],
        &out,
    )
    .unwrap();

    let rows = read_report_csv(&out.join("eval_report.csv")).unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r.model.as_str()).collect();
    assert_eq!(
        names,
        vec!["knn-microphone", "knn-accelerometer", "averaged"]
    );
    let worst = rows[0].mse_overall.max(rows[1].mse_overall);
    assert!(rows[2].mse_overall <= worst + 1e-15);
    assert!(out.join("predictions_averaged.csv").exists());
    assert!(out.join("eval_scatter.svg").exists());

    // A dataset generated from a different seed no longer aligns.
    let other_cfg = fast_config(&[("models", "knn"), ("seed", "8")]);
    let other_ds = commands::cmd_generate(&other_cfg, &dir.path().join("other")).unwrap();
    let err = commands::cmd_evaluate(
        &mic_cfg,
        &[
            (dir.path().join("mic/model_knn.mdl"), mic_ds),
            (dir.path().join("mic/model_knn.mdl"), other_ds),
        ],
        &dir.path().join("eval2"),
    );
    assert!(matches!(err, Err(Error::Config(_))));
}

#[test]
fn ablation_reports_five_nested_subsets() {
    let cfg = fast_config(&[("n_samples", "40")]);
    let dir = tempfile::tempdir().unwrap();
    let ds = commands::cmd_generate(&cfg, dir.path()).unwrap();
    commands::cmd_ablate_sensors(&cfg, &ds, dir.path()).unwrap();

    let rows = read_report_csv(&dir.path().join("ablation_report.csv")).unwrap();
    assert_eq!(rows.len(), 5);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.model, format!("sensors-{}", i + 1));
    }

    // The 5-sensor run must match the unrestricted ensemble run exactly.
    commands::cmd_train(&cfg, &ds, &dir.path().join("full")).unwrap();
    let full_rows =
        read_report_csv(&dir.path().join("full").join("train_report.csv")).unwrap();
    let ens = full_rows.iter().find(|r| r.model == "ensemble").unwrap();
    assert_eq!(rows[4].mse_overall, ens.mse_overall);
    assert_eq!(rows[4].mean_distance, ens.mean_distance);

    // Subset features are index-projections of the next subset's features.
    let full = elastiloc::datagen::read_dataset(&ds).unwrap();
    for k in 1..5usize {
        let mut keep_small: Vec<usize> = commands::ABLATION_PRIORITY[..k].to_vec();
        keep_small.sort_unstable();
        let mut keep_big: Vec<usize> = commands::ABLATION_PRIORITY[..k + 1].to_vec();
        keep_big.sort_unstable();
        let small = elastiloc::datagen::restrict_sensors(&full, &keep_small).unwrap();
        let big = elastiloc::datagen::restrict_sensors(&full, &keep_big).unwrap();
        let positions: Vec<usize> = keep_small
            .iter()
            .map(|s| keep_big.iter().position(|b| b == s).unwrap())
            .collect();
        for (srow, brow) in small.samples().iter().zip(big.samples()) {
            for (new_block, &pos) in positions.iter().enumerate() {
                assert_eq!(
                    &srow.features[12 * new_block..12 * (new_block + 1)],
                    &brow.features[12 * pos..12 * (pos + 1)]
                );
            }
        }
    }
}

#[test]
fn ablation_rejects_non_microphone_datasets() {
    let cfg = fast_config(&[("sensors", "accelerometer")]);
    let dir = tempfile::tempdir().unwrap();
    let ds = commands::cmd_generate(&cfg, dir.path()).unwrap();
    assert!(matches!(
        commands::cmd_ablate_sensors(&cfg, &ds, dir.path()),
        Err(Error::Config(_))
    ));
}

#[test]
fn missing_dataset_fails_without_partial_outputs() {
    let cfg = fast_config(&[]);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let err = commands::cmd_train(&cfg, &out.join("nope.csv"), &out);
    assert!(matches!(err, Err(Error::Config(_))));
    if out.exists() {
        assert_eq!(read_dir_bytes(&out).len(), 0, "no partial outputs");
    }
}

#[test]
fn report_command_renders_figures_from_existing_csv() {
    let cfg = fast_config(&[("models", "linear,knn")]);
    let dir = tempfile::tempdir().unwrap();
    let ds = commands::cmd_generate(&cfg, dir.path()).unwrap();
    commands::cmd_train(&cfg, &ds, dir.path()).unwrap();
    commands::cmd_evaluate(
        &cfg,
        &[(dir.path().join("model_knn.mdl"), ds)],
        &dir.path().join("ev"),
    )
    .unwrap();

    let out = dir.path().join("rep");
    commands::cmd_report(
        &cfg,
        &dir.path().join("ev/eval_report.csv"),
        Some(&dir.path().join("ev/predictions_knn-microphone.csv")),
        &out,
    )
    .unwrap();
    assert!(out.join("report_mad.svg").exists());
    assert!(out.join("report_scatter.svg").exists());
    assert!(out.join("manifest_report.txt").exists());
}

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_elastiloc"))
}

#[test]
fn binary_maps_errors_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    // Unknown configuration key: exit 2.
    let status = Command::new(bin())
        .args(["generate", "--set", "bogus=1", "--out"])
        .arg(dir.path().join("a"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Missing dataset file: exit 2.
    let status = Command::new(bin())
        .args(["train", "--dataset"])
        .arg(dir.path().join("missing.csv"))
        .arg("--out")
        .arg(dir.path().join("b"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Small end-to-end success: exit 0.
    let status = Command::new(bin())
        .args([
            "generate",
            "--set",
            "mesh=4x2x2",
            "--set",
            "n_samples=3",
            "--out",
        ])
        .arg(dir.path().join("c"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.path().join("c/dataset_single_microphone.csv").exists());

    // Unreachable solver tolerance (below the residual measurement noise
    // floor): runtime failure, exit 3.
    let status = Command::new(bin())
        .args([
            "generate",
            "--set",
            "mesh=4x2x2",
            "--set",
            "n_samples=2",
            "--set",
            "rel_tol=1e-16",
            "--out",
        ])
        .arg(dir.path().join("d"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}
