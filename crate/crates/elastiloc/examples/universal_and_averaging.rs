//! The combined-data workflow: concatenate datasets spanning both source
//! widths and both mesh refinements, train one ensemble per sensor type on
//! the result, and average the two predictions.
//!
//! Run with: cargo run --release --example universal_and_averaging

use elastiloc::datagen::{concat_datasets, generate_dataset, Dataset, DatasetConfig, SensorLayout};
use elastiloc::eval::{average_predictions, mse};
use elastiloc::learn::{train_val_split, ModelFamily, Params, Pipeline, SplitSpec};

const SPLIT: SplitSpec = SplitSpec {
    train_fraction: 0.7,
    seed: 11,
};

fn universal(layout: SensorLayout, n_per_part: usize) -> elastiloc::Result<Dataset> {
    let mut parts = Vec::new();
    for (i, (eps, mesh)) in [
        (0.01, (10, 5, 4)),
        (0.01, (20, 10, 8)),
        (0.001, (10, 5, 4)),
        (0.001, (20, 10, 8)),
    ]
    .into_iter()
    .enumerate()
    {
        // Same per-part seeds for both sensor types, so the sampled source
        // sequences (and hence validation labels) line up row for row.
        let dc = DatasetConfig::new(eps, mesh, layout.clone(), n_per_part, 900 + i as u64);
        let tag = dc.tag();
        parts.push((generate_dataset(&dc)?, tag));
    }
    concat_datasets(&parts)
}

fn main() -> elastiloc::Result<()> {
    let n_per_part = 150;
    println!("generating 2 x 4 x {n_per_part} samples (this runs 8 forward-model batches)...");
    let mic = universal(SensorLayout::microphones(), n_per_part)?;
    let acc = universal(SensorLayout::accelerometers(), n_per_part)?;
    println!("combined datasets: {} rows each\n", mic.len());

    let fit_predict = |dataset: &Dataset| -> elastiloc::Result<_> {
        let (train, val) = train_val_split(dataset, &SPLIT)?;
        let pipeline = Pipeline::fit(
            ModelFamily::Ensemble,
            &Params::new(),
            &train.features_matrix(),
            &train.labels_matrix(),
            1,
        )?;
        let pred = pipeline.predict(&val.features_matrix())?;
        Ok((val.labels_matrix(), pred))
    };

    let (labels, mic_pred) = fit_predict(&mic)?;
    let (acc_labels, acc_pred) = fit_predict(&acc)?;
    assert_eq!(labels, acc_labels, "validation labels align by construction");

    let avg = average_predictions(&mic_pred, &acc_pred)?;
    println!("ensemble validation MSE (m^2):");
    println!("  microphone     {:.4e}", mse(&labels, &mic_pred)?);
    println!("  accelerometer  {:.4e}", mse(&labels, &acc_pred)?);
    println!("  averaged       {:.4e}", mse(&labels, &avg)?);
    Ok(())
}
