//! Train every model family on one dataset and compare validation errors.
//!
//! Run with: cargo run --release --example train_and_compare

use elastiloc::datagen::{generate_dataset, DatasetConfig, SensorLayout};
use elastiloc::eval::EvalReport;
use elastiloc::learn::{train_val_split, ModelFamily, ParamValue, Params, Pipeline, SplitSpec};

fn main() -> elastiloc::Result<()> {
    let config = DatasetConfig::new(0.01, (10, 5, 4), SensorLayout::microphones(), 600, 7);
    println!("generating {} samples...", config.n_samples);
    let dataset = generate_dataset(&config)?;

    let (train, val) = train_val_split(
        &dataset,
        &SplitSpec {
            train_fraction: 0.7,
            seed: 11,
        },
    )?;
    println!("split: {} train / {} validation\n", train.len(), val.len());

    let x_train = train.features_matrix();
    let y_train = train.labels_matrix();
    let x_val = val.features_matrix();
    let y_val = val.labels_matrix();

    println!(
        "{:<10} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "model", "mse", "mse_x", "mse_y", "mse_z", "mean dist"
    );
    for family in ModelFamily::ALL {
        let mut params = Params::new();
        if matches!(family, ModelFamily::Knn) {
            params.insert("n_neighbors".into(), ParamValue::Int(4));
        }
        let pipeline = Pipeline::fit(family, &params, &x_train, &y_train, 7)?;
        let pred = pipeline.predict(&x_val)?;
        let r = EvalReport::compute(family.as_str(), &y_val, &pred)?;
        println!(
            "{:<10} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            r.model,
            r.mse_overall,
            r.mse_per_coordinate[0],
            r.mse_per_coordinate[1],
            r.mse_per_coordinate[2],
            r.mean_distance
        );
    }
    Ok(())
}
