//! Persist a fitted pipeline and reload it: predictions survive the round
//! trip bit-exactly.
//!
//! Run with: cargo run --release --example save_load_models

use std::path::Path;

use elastiloc::datagen::{generate_dataset, DatasetConfig, SensorLayout};
use elastiloc::learn::{io, train_val_split, ModelFamily, Params, Pipeline, SplitSpec};

fn main() -> elastiloc::Result<()> {
    let config = DatasetConfig::new(0.01, (10, 5, 4), SensorLayout::accelerometers(), 200, 3);
    println!("generating {} samples...", config.n_samples);
    let dataset = generate_dataset(&config)?;
    let (train, val) = train_val_split(
        &dataset,
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
        3,
    )?;

    let out = Path::new("target/example_out");
    std::fs::create_dir_all(out).ok();
    let path = out.join("ensemble.mdl");
    io::save_pipeline(&pipeline, &path)?;
    println!(
        "saved {} ({} bytes)",
        path.display(),
        std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0)
    );

    let loaded = io::load_pipeline(&path)?;
    let x_val = val.features_matrix();
    let a = pipeline.predict(&x_val)?;
    let b = loaded.predict(&x_val)?;
    assert_eq!(a, b, "round trip must be bit-exact");
    println!(
        "reloaded pipeline reproduces all {} validation predictions bit-exactly",
        x_val.nrows()
    );
    Ok(())
}
