//! Generate a small labelled dataset and persist it as CSV with its
//! metadata sidecar.
//!
//! Run with: cargo run --release --example generate_dataset

use std::path::Path;

use elastiloc::datagen::{generate_dataset, write_dataset, DatasetConfig, SensorLayout};

fn main() -> elastiloc::Result<()> {
    let config = DatasetConfig::new(0.01, (10, 5, 4), SensorLayout::microphones(), 100, 7);
    println!(
        "generating {} samples on the {:?} mesh (eps = {}, seed = {})...",
        config.n_samples, config.divisions, config.eps, config.seed
    );
    let dataset = generate_dataset(&config)?;
    println!(
        "done: {} rows x {} features + 3 labels",
        dataset.len(),
        dataset.feature_len()
    );

    let first = &dataset.samples()[0];
    println!(
        "first row: label ({:.4}, {:.4}, {:.4}), |u| at site 0 = {:.3e} m",
        first.label[0],
        first.label[1],
        first.label[2],
        (first.features[0].powi(2) + first.features[1].powi(2) + first.features[2].powi(2))
            .sqrt()
    );

    let out = Path::new("target/example_out");
    std::fs::create_dir_all(out).ok();
    let path = out.join("demo_dataset.csv");
    write_dataset(&dataset, &path)?;
    println!("wrote {} (+ .meta sidecar)", path.display());
    Ok(())
}
