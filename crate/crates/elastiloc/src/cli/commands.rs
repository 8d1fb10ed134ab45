//! The experiment commands behind the CLI subcommands. Each command
//! validates its inputs, does the work, writes its artifacts into the
//! output directory and finishes with a manifest; on error, files created
//! by the failed run are removed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::cli::config::{Recipe, RunConfig, COARSE_MESH, EPS_VALUES, FINE_MESH};
use crate::cli::manifest::Run;
use crate::datagen::{
    concat_datasets, fmt_f64, generate_dataset, read_dataset, restrict_sensors, sidecar_path,
    Dataset, DatasetConfig,
};
use crate::error::{Error, Result};
use crate::eval::{
    average_predictions, figures, read_report_csv, write_report_csv, EvalReport,
};
use crate::learn::{io, train_val_split, ModelFamily, Pipeline, SplitSpec};
use crate::matrix::Matrix;
use crate::seeding::derive_seed;
use crate::tune::{grid_search, write_tune_csv, ParamGrid};

/// Ablation priority over the five microphone sites: the central site
/// first, then the remaining (equidistant) sites by index.
pub const ABLATION_PRIORITY: [usize; 5] = [2, 0, 1, 3, 4];

fn dataset_config(cfg: &RunConfig, eps: f64, mesh: (usize, usize, usize), seed: u64) -> DatasetConfig {
    let mut dc = DatasetConfig::new(eps, mesh, cfg.sensors.clone(), cfg.n_samples, seed);
    dc.material = cfg.material();
    dc.amplitude = cfg.amplitude;
    dc.rel_tol = cfg.rel_tol;
    dc
}

/// Generate the datasets for the configured recipe. Combined recipes derive
/// one seed per part from the master seed, so microphone and accelerometer
/// runs with the same seed sample identical source sequences.
pub fn cmd_generate(cfg: &RunConfig, out_dir: &Path) -> Result<PathBuf> {
    let mut run = Run::new("generate", out_dir, cfg.dump())?;

    let parts: Vec<(f64, (usize, usize, usize))> = match cfg.recipe {
        Recipe::Single => vec![(cfg.eps, cfg.mesh)],
        Recipe::PerEps => vec![(cfg.eps, COARSE_MESH), (cfg.eps, FINE_MESH)],
        Recipe::Universal | Recipe::Ablation => EPS_VALUES
            .iter()
            .flat_map(|&e| [(e, COARSE_MESH), (e, FINE_MESH)])
            .collect(),
    };

    let dataset = if parts.len() == 1 {
        let dc = dataset_config(cfg, parts[0].0, parts[0].1, cfg.seed);
        generate_dataset(&dc)?
    } else {
        let mut pieces = Vec::with_capacity(parts.len());
        for (i, &(eps, mesh)) in parts.iter().enumerate() {
            let dc = dataset_config(cfg, eps, mesh, derive_seed(cfg.seed, i as u64));
            let tag = dc.tag();
            pieces.push((generate_dataset(&dc)?, tag));
        }
        concat_datasets(&pieces)?
    };

    let name = format!(
        "dataset_{}_{}.csv",
        cfg.recipe.as_str().replace('-', ""),
        cfg.sensors.kind().as_str()
    );
    let path = run.output(&name);
    run.output(&format!("{name}.meta"));
    crate::datagen::write_dataset(&dataset, &path)?;
    println!(
        "wrote {} ({} samples, {} features)",
        path.display(),
        dataset.len(),
        dataset.feature_len()
    );
    run.finish()?;
    Ok(path)
}

fn load_dataset_checked(path: &Path) -> Result<Dataset> {
    if !path.exists() {
        return Err(Error::Config(format!(
            "dataset file {} does not exist",
            path.display()
        )));
    }
    read_dataset(path)
}

fn split_cfg(cfg: &RunConfig) -> SplitSpec {
    SplitSpec {
        train_fraction: cfg.train_fraction,
        seed: cfg.split_seed,
    }
}

/// Train every configured family on the dataset's training split, save the
/// fitted pipelines and emit a validation comparison report.
pub fn cmd_train(cfg: &RunConfig, dataset_path: &Path, out_dir: &Path) -> Result<()> {
    let dataset = load_dataset_checked(dataset_path)?;
    let mut run = Run::new("train", out_dir, cfg.dump())?;
    run.add_input(dataset_path);

    let (train, val) = train_val_split(&dataset, &split_cfg(cfg))?;
    let x_train = train.features_matrix();
    let y_train = train.labels_matrix();
    let x_val = val.features_matrix();
    let y_val = val.labels_matrix();

    let mut reports = Vec::with_capacity(cfg.models.len());
    for &family in &cfg.models {
        let params = cfg.family_params(family);
        let pipeline = Pipeline::fit(family, &params, &x_train, &y_train, cfg.seed)?;
        let model_path = run.output(&format!("model_{}.mdl", family.as_str()));
        io::save_pipeline(&pipeline, &model_path)?;

        let pred = pipeline.predict(&x_val)?;
        reports.push(EvalReport::compute(family.as_str(), &y_val, &pred)?);
        println!(
            "trained {:<8} validation mse {:.6e}",
            family.as_str(),
            reports.last().unwrap().mse_overall
        );
    }

    let report_path = run.output("train_report.csv");
    write_report_csv(&reports, &report_path)?;
    emit_mad_bars(&reports, &run.output("train_mad.svg"))?;
    run.finish()?;
    Ok(())
}

/// Grid search over the configured axes on the training split only.
pub fn cmd_tune(cfg: &RunConfig, dataset_path: &Path, out_dir: &Path) -> Result<()> {
    if cfg.grid.is_empty() {
        return Err(Error::Config(
            "tune needs at least one grid_<param> axis in the configuration".into(),
        ));
    }
    let dataset = load_dataset_checked(dataset_path)?;
    let mut run = Run::new("tune", out_dir, cfg.dump())?;
    run.add_input(dataset_path);

    let (train, _) = train_val_split(&dataset, &split_cfg(cfg))?;
    let mut grid = ParamGrid::new(cfg.tune_family);
    for (name, values) in &cfg.grid {
        grid = grid.add(name, values.clone());
    }
    let result = grid_search(
        &grid,
        &train.features_matrix(),
        &train.labels_matrix(),
        cfg.k_folds,
        cfg.seed,
    )?;

    let csv = run.output(&format!("tune_{}.csv", cfg.tune_family.as_str()));
    write_tune_csv(&result, &csv)?;
    let best: Vec<String> = result
        .best
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    println!(
        "best {} parameters: {} (mean CV mse {:.6e})",
        cfg.tune_family.as_str(),
        best.join(", "),
        result.best_mean_mse
    );
    run.finish()?;
    Ok(())
}

fn predictions_csv(y_true: &Matrix, y_pred: &Matrix, path: &Path) -> Result<()> {
    let mut out = String::from("xc,yc,zc,px,py,pz\n");
    for r in 0..y_true.nrows() {
        let t = y_true.row(r);
        let p = y_pred.row(r);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(t[0]),
            fmt_f64(t[1]),
            fmt_f64(t[2]),
            fmt_f64(p[0]),
            fmt_f64(p[1]),
            fmt_f64(p[2])
        );
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn read_predictions_csv(path: &Path) -> Result<(Matrix, Matrix)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut truths = Vec::new();
    let mut preds = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != "xc,yc,zc,px,py,pz" {
                return Err(Error::Parse {
                    path: path.into(),
                    line: 1,
                    msg: "expected header xc,yc,zc,px,py,pz".into(),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<f64> = line
            .split(',')
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                path: path.into(),
                line: i + 1,
                msg: "bad float".into(),
            })?;
        if f.len() != 6 {
            return Err(Error::Parse {
                path: path.into(),
                line: i + 1,
                msg: format!("expected 6 fields, found {}", f.len()),
            });
        }
        truths.push(f[..3].to_vec());
        preds.push(f[3..].to_vec());
    }
    Ok((Matrix::from_rows(&truths)?, Matrix::from_rows(&preds)?))
}

fn emit_mad_bars(reports: &[EvalReport], path: &Path) -> Result<()> {
    let groups: Vec<String> = reports.iter().map(|r| r.model.clone()).collect();
    let series = vec!["x".to_string(), "y".to_string(), "z".to_string()];
    let values: Vec<Vec<f64>> = reports
        .iter()
        .map(|r| r.mad_per_coordinate.to_vec())
        .collect();
    figures::grouped_bar_svg(
        "mean absolute deviation per coordinate (m)",
        &groups,
        &series,
        &values,
        path,
    )
}

/// Evaluate one or two saved pipelines on the validation splits of their
/// datasets. With two pairs the validation labels must align row for row
/// (same source sampling), and an extra "averaged" row reports the mean of
/// the two predictions.
pub fn cmd_evaluate(
    cfg: &RunConfig,
    pairs: &[(PathBuf, PathBuf)],
    out_dir: &Path,
) -> Result<()> {
    if pairs.is_empty() || pairs.len() > 2 {
        return Err(Error::Config(
            "evaluate takes one or two --model/--dataset pairs".into(),
        ));
    }
    let mut run = Run::new("evaluate", out_dir, cfg.dump())?;

    let mut labelled: Vec<(String, Matrix, Matrix)> = Vec::new();
    for (model_path, dataset_path) in pairs {
        if !model_path.exists() {
            return Err(Error::Config(format!(
                "model file {} does not exist",
                model_path.display()
            )));
        }
        let pipeline = io::load_pipeline(model_path)?;
        let dataset = load_dataset_checked(dataset_path)?;
        run.add_input(model_path);
        run.add_input(dataset_path);

        let (_, val) = train_val_split(&dataset, &split_cfg(cfg))?;
        let y_val = val.labels_matrix();
        let pred = pipeline.predict(&val.features_matrix()).map_err(|e| {
            Error::Config(format!(
                "model {} does not fit dataset {}: {e}",
                model_path.display(),
                dataset_path.display()
            ))
        })?;
        let kind = dataset
            .meta()
            .get("sensor_kind")
            .cloned()
            .unwrap_or_else(|| "data".into());
        let label = format!("{}-{}", pipeline.model.family().as_str(), kind);
        labelled.push((label, y_val, pred));
    }

    let mut reports = Vec::new();
    for (label, y_val, pred) in &labelled {
        reports.push(EvalReport::compute(label, y_val, pred)?);
    }

    if labelled.len() == 2 {
        let (a, b) = (&labelled[0], &labelled[1]);
        if a.1 != b.1 {
            return Err(Error::Config(
                "validation labels of the two datasets do not align; generate them with the \
                 same seed and sample count"
                    .into(),
            ));
        }
        let avg = average_predictions(&a.2, &b.2)?;
        reports.push(EvalReport::compute("averaged", &a.1, &avg)?);
        labelled.push(("averaged".into(), a.1.clone(), avg));
    }

    for (label, y_val, pred) in &labelled {
        predictions_csv(y_val, pred, &run.output(&format!("predictions_{label}.csv")))?;
    }
    let report_path = run.output("eval_report.csv");
    write_report_csv(&reports, &report_path)?;
    emit_mad_bars(&reports, &run.output("eval_mad.svg"))?;

    // Scatter for the headline row (the averaged one when present).
    let (label, y_val, pred) = labelled.last().unwrap();
    figures::scatter_panes_svg(
        &format!("{label}: truth vs prediction"),
        y_val,
        pred,
        &run.output("eval_scatter.svg"),
    )?;

    for r in &reports {
        println!(
            "{:<24} mse {:.6e}  mean distance {:.6e} m",
            r.model, r.mse_overall, r.mean_distance
        );
    }
    run.finish()?;
    Ok(())
}

/// Train and evaluate the ensemble on nested sensor subsets of a
/// five-microphone dataset, growing outward from the central site.
pub fn cmd_ablate_sensors(cfg: &RunConfig, dataset_path: &Path, out_dir: &Path) -> Result<()> {
    let dataset = load_dataset_checked(dataset_path)?;
    if dataset.site_count() != 5 {
        return Err(Error::Config(format!(
            "sensor ablation expects the 5-site microphone layout, got {} sites",
            dataset.site_count()
        )));
    }
    let mut run = Run::new("ablate-sensors", out_dir, cfg.dump())?;
    run.add_input(dataset_path);

    let params = cfg.family_params(ModelFamily::Ensemble);
    let mut reports = Vec::new();
    for k in 1..=5usize {
        let mut keep: Vec<usize> = ABLATION_PRIORITY[..k].to_vec();
        keep.sort_unstable();
        let restricted = restrict_sensors(&dataset, &keep)?;
        let (train, val) = train_val_split(&restricted, &split_cfg(cfg))?;
        let pipeline = Pipeline::fit(
            ModelFamily::Ensemble,
            &params,
            &train.features_matrix(),
            &train.labels_matrix(),
            cfg.seed,
        )?;
        let y_val = val.labels_matrix();
        let pred = pipeline.predict(&val.features_matrix())?;
        reports.push(EvalReport::compute(&format!("sensors-{k}"), &y_val, &pred)?);
        println!(
            "sensors {k}: mean distance {:.6e} m",
            reports.last().unwrap().mean_distance
        );
    }

    let report_path = run.output("ablation_report.csv");
    write_report_csv(&reports, &report_path)?;
    emit_mad_bars(&reports, &run.output("ablation_mad.svg"))?;
    run.finish()?;
    Ok(())
}

/// Re-render figures from a previously written report (and optionally a
/// predictions file).
pub fn cmd_report(
    cfg: &RunConfig,
    report_path: &Path,
    predictions: Option<&Path>,
    out_dir: &Path,
) -> Result<()> {
    if !report_path.exists() {
        return Err(Error::Config(format!(
            "report file {} does not exist",
            report_path.display()
        )));
    }
    let reports = read_report_csv(report_path)?;
    if reports.is_empty() {
        return Err(Error::Config("report file has no rows".into()));
    }
    let mut run = Run::new("report", out_dir, cfg.dump())?;
    run.add_input(report_path);

    emit_mad_bars(&reports, &run.output("report_mad.svg"))?;
    if let Some(pred_path) = predictions {
        let (truths, preds) = read_predictions_csv(pred_path)?;
        run.add_input(pred_path);
        figures::scatter_panes_svg(
            "truth vs prediction",
            &truths,
            &preds,
            &run.output("report_scatter.svg"),
        )?;
    }
    run.finish()?;
    Ok(())
}

/// Convenience used by tests: path of the dataset a generate run writes.
pub fn generated_dataset_path(cfg: &RunConfig, out_dir: &Path) -> PathBuf {
    out_dir.join(format!(
        "dataset_{}_{}.csv",
        cfg.recipe.as_str().replace('-', ""),
        cfg.sensors.kind().as_str()
    ))
}

/// Sidecar helper re-exported for integration tests.
pub fn dataset_sidecar(path: &Path) -> PathBuf {
    sidecar_path(path)
}
