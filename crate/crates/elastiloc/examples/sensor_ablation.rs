//! How does accuracy change with the number of microphones? Train the
//! ensemble on nested sensor subsets growing outward from the central site.
//!
//! Run with: cargo run --release --example sensor_ablation

use elastiloc::datagen::{generate_dataset, restrict_sensors, DatasetConfig, SensorLayout};
use elastiloc::eval::{mean_euclidean_distance, per_coordinate_mean_abs};
use elastiloc::learn::{train_val_split, ModelFamily, Params, Pipeline, SplitSpec};

// Central site first, remaining sites by index.
const PRIORITY: [usize; 5] = [2, 0, 1, 3, 4];

fn main() -> elastiloc::Result<()> {
    let config = DatasetConfig::new(0.01, (10, 5, 4), SensorLayout::microphones(), 600, 7);
    println!("generating {} samples...", config.n_samples);
    let dataset = generate_dataset(&config)?;

    println!("\nsensors  kept sites      mean dist (m)   mad x / y / z (m)");
    for k in 1..=5usize {
        let mut keep: Vec<usize> = PRIORITY[..k].to_vec();
        keep.sort_unstable();
        let restricted = restrict_sensors(&dataset, &keep)?;
        let (train, val) = train_val_split(
            &restricted,
            &SplitSpec {
                train_fraction: 0.7,
                seed: 11,
            },
        )?;
        let pipeline = Pipeline::fit(
            ModelFamily::Ensemble,
            &Params::new(),
            &train.features_matrix(),
            &train.labels_matrix(),
            7,
        )?;
        let y_val = val.labels_matrix();
        let pred = pipeline.predict(&val.features_matrix())?;
        let dist = mean_euclidean_distance(&y_val, &pred)?;
        let mad = per_coordinate_mean_abs(&y_val, &pred)?;
        println!(
            "{k}        {:<15} {dist:.4e}      {:.2e} / {:.2e} / {:.2e}",
            format!("{keep:?}"),
            mad[0],
            mad[1],
            mad[2]
        );
    }
    Ok(())
}
